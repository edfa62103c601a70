//! Objective functions `F: R^m -> R` with analytic gradient and Hessian.
//!
//! The central one is [`PolyModulusObjective`], `F(x, y) = |g(x + iy)|^2 / 2`,
//! whose critical points are exactly the roots of `g * g'`.

use crate::complexpoly::{all_roots, sort_roots, Complex, Polynomial};
use crate::error::{Error, Result};
use crate::linalg::SymmetricMatrix;

/// Divergence radius used by objectives without a better estimate.
pub const DEFAULT_DIVERGENCE_RADIUS: f64 = 1e12;

/// Tolerance handed to the root finder when caching roots.
const ROOT_TOL: f64 = 1e-12;

pub trait ObjectiveFunction: Sync {
    fn dimension(&self) -> usize;
    fn value(&self, z: &[f64]) -> f64;
    fn gradient(&self, z: &[f64]) -> Vec<f64>;
    fn hessian(&self, z: &[f64]) -> SymmetricMatrix;

    /// `f(z_new) - f(z)`. Objectives that can avoid the cancellation of the
    /// plain difference near a nonzero critical value override this.
    fn value_change(&self, z: &[f64], z_new: &[f64]) -> f64 {
        self.value(z_new) - self.value(z)
    }

    /// Runs whose iterates leave this ball are reported as diverged.
    fn divergence_radius(&self) -> f64 {
        DEFAULT_DIVERGENCE_RADIUS
    }

    /// Present when the objective is `|g|^2/2` for a polynomial `g`; enables
    /// limit classification and the one-variable methods.
    fn as_poly_modulus(&self) -> Option<&PolyModulusObjective> {
        None
    }
}

/// Where a run ended up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitClass {
    /// Index into the sorted root list of `g`.
    Root(usize),
    /// A zero of `g'` that is not a zero of `g`.
    CriticalNonRoot(Complex),
    Diverged,
    Undecided,
}

impl LimitClass {
    pub fn name(&self) -> &'static str {
        match self {
            LimitClass::Root(_) => "Root",
            LimitClass::CriticalNonRoot(_) => "CriticalNonRoot",
            LimitClass::Diverged => "Diverged",
            LimitClass::Undecided => "Undecided",
        }
    }

    pub fn root_index(&self) -> Option<usize> {
        match self {
            LimitClass::Root(i) => Some(*i),
            _ => None,
        }
    }

    /// Same kind, same root index, and critical points within `tol`.
    pub fn matches(&self, other: &LimitClass, tol: f64) -> bool {
        match (self, other) {
            (LimitClass::Root(a), LimitClass::Root(b)) => a == b,
            (LimitClass::CriticalNonRoot(a), LimitClass::CriticalNonRoot(b)) => (a - b).norm() <= tol,
            (LimitClass::Diverged, LimitClass::Diverged) => true,
            (LimitClass::Undecided, LimitClass::Undecided) => true,
            _ => false,
        }
    }
}

impl std::fmt::Display for LimitClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LimitClass::Root(i) => write!(f, "Root({i})"),
            LimitClass::CriticalNonRoot(c) => write!(f, "CriticalNonRoot({:.16e}{:+.16e}i)", c.re, c.im),
            LimitClass::Diverged => write!(f, "Diverged"),
            LimitClass::Undecided => write!(f, "Undecided"),
        }
    }
}

/// `F(x, y) = |g(x + iy)|^2 / 2` for a polynomial `g` of degree at least one.
#[derive(Debug, Clone)]
pub struct PolyModulusObjective {
    g: Polynomial,
    dg: Polynomial,
    d2g: Polynomial,
    roots: Vec<Complex>,
    critical_non_roots: Vec<Complex>,
    divergence_radius: f64,
}

impl PolyModulusObjective {
    pub fn new(g: Polynomial) -> Result<Self> {
        if g.degree() == 0 {
            return Err(Error::InvalidConfig("polynomial objective needs degree >= 1".into()));
        }
        let dg = g.derivative();
        let d2g = dg.derivative();
        let roots = distinct(all_roots(&g, ROOT_TOL)?);
        let critical_non_roots = if dg.degree() >= 1 {
            distinct(all_roots(&dg, ROOT_TOL)?)
                .into_iter()
                .filter(|c| roots.iter().all(|r| (r - c).norm() > 1e-6 * (1.0 + r.norm())))
                .collect()
        } else {
            Vec::new()
        };
        let divergence_radius = 1e8 * (1.0 + g.cauchy_bound());
        Ok(Self {
            g,
            dg,
            d2g,
            roots,
            critical_non_roots,
            divergence_radius,
        })
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.g
    }

    /// Distinct roots of `g`, sorted; multiple roots appear once.
    pub fn roots(&self) -> &[Complex] {
        &self.roots
    }

    pub fn critical_non_roots(&self) -> &[Complex] {
        &self.critical_non_roots
    }

    /// `(g, g', g'')` at `x + iy`.
    fn jets(&self, x: f64, y: f64) -> (Complex, Complex, Complex) {
        let z = Complex::new(x, y);
        (self.g.eval(z), self.dg.eval(z), self.d2g.eval(z))
    }

    pub fn pmo_value(&self, x: f64, y: f64) -> f64 {
        0.5 * self.g.eval(Complex::new(x, y)).norm_sqr()
    }

    pub fn pmo_gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let (g, dg, _) = self.jets(x, y);
        modulus_gradient(g, dg)
    }

    pub fn pmo_hessian(&self, x: f64, y: f64) -> SymmetricMatrix {
        let (g, dg, d2g) = self.jets(x, y);
        modulus_hessian(g, dg, d2g)
    }

    /// Classifies a terminal point against the roots of `g` and then the
    /// critical points of `g`. Roots take precedence.
    pub fn classify_limit(&self, z: &[f64], tol: f64) -> LimitClass {
        let p = Complex::new(z[0], z[1]);
        let nearest = |set: &[Complex]| {
            set.iter()
                .enumerate()
                .map(|(i, r)| (i, (p - r).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
        };
        if let Some((i, d)) = nearest(&self.roots) {
            if d <= tol {
                return LimitClass::Root(i);
            }
        }
        if let Some((i, d)) = nearest(&self.critical_non_roots) {
            if d <= tol {
                return LimitClass::CriticalNonRoot(self.critical_non_roots[i]);
            }
        }
        if p.norm() > self.divergence_radius || !p.norm().is_finite() {
            return LimitClass::Diverged;
        }
        LimitClass::Undecided
    }
}

/// Merges roots closer than `1e-6 (1 + |r|)` into their mean, so a multiple
/// root gets a single index.
fn distinct(roots: Vec<Complex>) -> Vec<Complex> {
    let mut clusters: Vec<(Complex, Vec<Complex>)> = Vec::new();
    for r in roots {
        match clusters
            .iter_mut()
            .find(|(first, _)| (first - r).norm() <= 1e-6 * (1.0 + first.norm()))
        {
            Some((_, members)) => members.push(r),
            None => clusters.push((r, vec![r])),
        }
    }
    let mut out: Vec<Complex> = clusters
        .into_iter()
        .map(|(_, m)| m.iter().sum::<Complex>() / m.len() as f64)
        .collect();
    sort_roots(&mut out);
    out
}

/// `∇F = (Re(g' conj g), -Im(g' conj g))`
fn modulus_gradient(g: Complex, dg: Complex) -> [f64; 2] {
    let t = dg * g.conj();
    [t.re, -t.im]
}

/// `H_xx = Re(g'' conj g) + |g'|^2`, `H_yy = -Re(g'' conj g) + |g'|^2`,
/// `H_xy = -Im(g'' conj g)`.
fn modulus_hessian(g: Complex, dg: Complex, d2g: Complex) -> SymmetricMatrix {
    let t = d2g * g.conj();
    let s = dg.norm_sqr();
    let mut h = SymmetricMatrix::zeros(2);
    h.set(0, 0, t.re + s);
    h.set(1, 1, -t.re + s);
    h.set(0, 1, -t.im);
    h
}

impl ObjectiveFunction for PolyModulusObjective {
    fn dimension(&self) -> usize {
        2
    }

    fn value(&self, z: &[f64]) -> f64 {
        self.pmo_value(z[0], z[1])
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        self.pmo_gradient(z[0], z[1]).to_vec()
    }

    /// `(|g + Δ|^2 - |g|^2) / 2 = Re(Δ conj g) + |Δ|^2 / 2` with `Δ` taken
    /// from the Taylor expansion of `g` at `z`.
    fn value_change(&self, z: &[f64], z_new: &[f64]) -> f64 {
        let w = Complex::new(z[0], z[1]);
        let h = Complex::new(z_new[0] - z[0], z_new[1] - z[1]);
        let delta = self.g.increment(w, h);
        (delta * self.g.eval(w).conj()).re + 0.5 * delta.norm_sqr()
    }

    fn hessian(&self, z: &[f64]) -> SymmetricMatrix {
        self.pmo_hessian(z[0], z[1])
    }

    fn divergence_radius(&self) -> f64 {
        self.divergence_radius
    }

    fn as_poly_modulus(&self) -> Option<&PolyModulusObjective> {
        Some(self)
    }
}

/// `|g|^2/2` for the Newton quotient `g = P / P'`, whose zeros are the zeros
/// of `P`, all simple. Defined away from the zeros of `P'`.
#[derive(Debug, Clone)]
pub struct NewtonQuotientObjective {
    p: Polynomial,
    dp: Polynomial,
    d2p: Polynomial,
    d3p: Polynomial,
}

impl NewtonQuotientObjective {
    pub fn new(p: Polynomial) -> Result<Self> {
        if p.degree() < 1 {
            return Err(Error::InvalidConfig("P must have degree >= 1".into()));
        }
        let dp = p.derivative();
        let d2p = dp.derivative();
        let d3p = d2p.derivative();
        Ok(Self { p, dp, d2p, d3p })
    }

    fn jets(&self, x: f64, y: f64) -> (Complex, Complex, Complex) {
        let z = Complex::new(x, y);
        let (p, dp, d2p, d3p) = (self.p.eval(z), self.dp.eval(z), self.d2p.eval(z), self.d3p.eval(z));
        let g = p / dp;
        // g' = 1 - P P'' / P'^2
        let dg = 1.0 - p * d2p / (dp * dp);
        // g'' = -(P' P'' + P P''') / P'^2 + 2 P P''^2 / P'^3
        let d2g = -(dp * d2p + p * d3p) / (dp * dp) + 2.0 * p * d2p * d2p / (dp * dp * dp);
        (g, dg, d2g)
    }
}

impl ObjectiveFunction for NewtonQuotientObjective {
    fn dimension(&self) -> usize {
        2
    }

    fn value(&self, z: &[f64]) -> f64 {
        let w = Complex::new(z[0], z[1]);
        0.5 * (self.p.eval(w) / self.dp.eval(w)).norm_sqr()
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let (g, dg, _) = self.jets(z[0], z[1]);
        modulus_gradient(g, dg).to_vec()
    }

    fn hessian(&self, z: &[f64]) -> SymmetricMatrix {
        let (g, dg, d2g) = self.jets(z[0], z[1]);
        modulus_hessian(g, dg, d2g)
    }
}

/// `F(x, y) = xy`, or with `sheared` set, `G(x, y) = (x + y) y`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BilinearTestObjective {
    pub sheared: bool,
}

impl BilinearTestObjective {
    pub fn plain() -> Self {
        Self { sheared: false }
    }

    pub fn sheared() -> Self {
        Self { sheared: true }
    }
}

impl ObjectiveFunction for BilinearTestObjective {
    fn dimension(&self) -> usize {
        2
    }

    fn value(&self, z: &[f64]) -> f64 {
        if self.sheared {
            (z[0] + z[1]) * z[1]
        } else {
            z[0] * z[1]
        }
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        if self.sheared {
            vec![z[1], z[0] + 2.0 * z[1]]
        } else {
            vec![z[1], z[0]]
        }
    }

    fn hessian(&self, _z: &[f64]) -> SymmetricMatrix {
        let d = if self.sheared { 2.0 } else { 0.0 };
        SymmetricMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, d]])
    }
}

/// `F(z) = ½ zᵀ H z − bᵀ z` with a constant symmetric `H`.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    pub hessian: SymmetricMatrix,
    pub linear: Vec<f64>,
}

impl QuadraticObjective {
    pub fn new(hessian: SymmetricMatrix, linear: Vec<f64>) -> Self {
        assert_eq!(hessian.dim(), linear.len());
        Self { hessian, linear }
    }

    /// `½ ‖z‖²`
    pub fn half_norm_squared(dim: usize) -> Self {
        Self::new(SymmetricMatrix::identity(dim), vec![0.0; dim])
    }
}

impl ObjectiveFunction for QuadraticObjective {
    fn dimension(&self) -> usize {
        self.linear.len()
    }

    fn value(&self, z: &[f64]) -> f64 {
        let hz = self.hessian.mul_vec(z);
        0.5 * crate::linalg::dot(z, &hz) - crate::linalg::dot(&self.linear, z)
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        self.hessian
            .mul_vec(z)
            .iter()
            .zip(&self.linear)
            .map(|(h, b)| h - b)
            .collect()
    }

    fn hessian(&self, _z: &[f64]) -> SymmetricMatrix {
        self.hessian.clone()
    }
}
