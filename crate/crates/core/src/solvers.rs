//! Iterative methods as single steps, plus a run loop that records a full trace.
//!
//! The main method is the backtracking New Q-Newton iteration with the
//! `theta`-normalized direction ([`bnqn_step`]). `theta = 0` is the variant for
//! objectives with compact sublevels, `theta = 1` the general one.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complexpoly::{newton_map_1d, relaxed_newton_map, sample_relaxed_alpha, Complex, RelaxationDisk};
use crate::error::{Error, Result};
use crate::fmt_num;
use crate::linalg::{
    dot, eigh, minsp_of, norm, reflected_direction_from, solve_symmetric, EigenDecomposition, SymmetricMatrix,
};
use crate::objective::{LimitClass, ObjectiveFunction};

/// Sufficient-decrease constant in the Armijo test.
pub const ARMIJO_FACTOR: f64 = 1.0 / 3.0;
/// Step-size shrink factor of the backtracking loop.
pub const SHRINK_FACTOR: f64 = 1.0 / 3.0;
/// Below this the line search gives up.
pub const MIN_STEP: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Candidate Hessian shifts `δ_0 .. δ_m`, pairwise distinct.
    pub deltas: Vec<f64>,
    pub tau: f64,
    pub theta: f64,
    pub gamma0: f64,
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Distance within which a terminal point is attributed to a root or critical point.
    pub classify_tol: f64,
    pub seed: Option<u64>,
}

impl SolverConfig {
    /// Defaults for dimension `dim`: deltas `0, 1, -1, 2, -2, ...` (so `{0, 1, -1}`
    /// in the plane), `tau = 1`, `theta = 0`, `gamma0 = 1`.
    pub fn default_for(dim: usize) -> Self {
        let deltas = (0..=dim)
            .map(|k| {
                let mag = k.div_ceil(2) as f64;
                if k % 2 == 1 {
                    mag
                } else {
                    -mag
                }
            })
            .map(|d| if d == 0.0 { 0.0 } else { d })
            .collect();
        Self {
            deltas,
            tau: 1.0,
            theta: 0.0,
            gamma0: 1.0,
            grad_tol: 1e-10,
            max_iter: 10_000,
            classify_tol: 1e-3,
            seed: None,
        }
    }

    /// `κ = ½ min_{i≠j} |δ_i − δ_j|`
    pub fn kappa(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.deltas.iter().enumerate() {
            for b in &self.deltas[i + 1..] {
                best = best.min((a - b).abs());
            }
        }
        0.5 * best
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.deltas.len() != dim + 1 {
            return bad(format!(
                "need {} deltas for dimension {dim}, got {}",
                dim + 1,
                self.deltas.len()
            ));
        }
        if self.deltas.iter().any(|d| !d.is_finite()) {
            return bad("deltas must be finite".into());
        }
        if !(self.kappa() > 0.0) {
            return bad("deltas must be pairwise distinct".into());
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return bad(format!("theta must be non-negative, got {}", self.theta));
        }
        if !(self.gamma0 > 0.0 && self.gamma0 <= 1.0) {
            return bad(format!("gamma0 must lie in (0, 1], got {}", self.gamma0));
        }
        if !(self.grad_tol >= 0.0) {
            return bad(format!("grad_tol must be non-negative, got {}", self.grad_tol));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive".into());
        }
        if !(self.classify_tol > 0.0) {
            return bad(format!("classify_tol must be positive, got {}", self.classify_tol));
        }
        Ok(())
    }
}

/// Draws `dim + 1` deltas uniformly from `[-1, 1]` with pairwise gap at least 0.1.
pub fn random_deltas(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<f64> = Vec::with_capacity(dim + 1);
    while out.len() < dim + 1 {
        let d = rng.gen_range(-1.0..=1.0);
        if out.iter().all(|o: &f64| (o - d).abs() >= 0.1) {
            out.push(d);
        }
    }
    out
}

/// The shift chosen for one step.
#[derive(Debug, Clone)]
pub struct DeltaChoice {
    pub index: usize,
    /// `∇²F + δ_j ‖∇F‖^τ Id`
    pub matrix: SymmetricMatrix,
    pub eigen: EigenDecomposition,
}

/// Smallest `j` with `minsp(H + δ_j ‖∇F‖^τ Id) ≥ κ ‖∇F‖^τ`.
pub fn select_delta(hess: &SymmetricMatrix, grad_norm: f64, cfg: &SolverConfig) -> Result<DeltaChoice> {
    let scale = grad_norm.powf(cfg.tau);
    let threshold = cfg.kappa() * scale;
    for (index, &delta) in cfg.deltas.iter().enumerate() {
        let matrix = hess.shifted(delta * scale);
        let eigen = eigh(&matrix);
        if minsp_of(&eigen) >= threshold {
            return Ok(DeltaChoice { index, matrix, eigen });
        }
    }
    Err(Error::NoAdmissibleDelta {
        count: cfg.deltas.len(),
    })
}

/// The Armijo test on an already computed change `f(z − γŵ) − f(z)`.
pub fn armijo_satisfied(change: f64, gamma: f64, slope: f64) -> bool {
    change <= -gamma * slope * ARMIJO_FACTOR
}

/// Backtracking: the largest `γ ∈ {γ₀, γ₀/3, ...}` with
/// `f(z − γŵ) − f(z) ≤ −γ⟨ŵ, ∇f(z)⟩/3`.
pub fn armijo_search<F: ObjectiveFunction + ?Sized>(f: &F, z: &[f64], w_hat: &[f64], gamma0: f64) -> Result<f64> {
    let grad = f.gradient(z);
    armijo_with(f, z, w_hat, &grad, gamma0)
}

fn armijo_with<F: ObjectiveFunction + ?Sized>(
    f: &F,
    z: &[f64],
    w_hat: &[f64],
    grad: &[f64],
    gamma0: f64,
) -> Result<f64> {
    let slope = dot(w_hat, grad);
    let mut gamma = gamma0;
    loop {
        let trial = axpy(z, -gamma, w_hat);
        if armijo_satisfied(f.value_change(z, &trial), gamma, slope) {
            return Ok(gamma);
        }
        gamma *= SHRINK_FACTOR;
        if gamma < MIN_STEP || !gamma.is_finite() {
            return Err(Error::LineSearchUnderflow(MIN_STEP));
        }
    }
}

/// `z + a * w`
fn axpy(z: &[f64], a: f64, w: &[f64]) -> Vec<f64> {
    z.iter().zip(w).map(|(zi, wi)| zi + a * wi).collect()
}

/// What one step did.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub delta_index: usize,
    pub gamma: f64,
    /// The direction actually used: `z_next = z − γ · direction`.
    pub direction: Vec<f64>,
    pub grad_norm: f64,
}

/// One step of backtracking New Q-Newton (new variant).
pub fn bnqn_step<F: ObjectiveFunction + ?Sized>(
    f: &F,
    z: &[f64],
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, StepRecord)> {
    let grad = f.gradient(z);
    let grad_norm = norm(&grad);
    if grad_norm == 0.0 {
        return Ok((z.to_vec(), stationary_record(z.len())));
    }
    let choice = select_delta(&f.hessian(z), grad_norm, cfg)?;
    let w = reflected_direction_from(&choice.eigen, &grad)?;
    let cap = 1f64.max(cfg.theta * norm(&w));
    let w_hat: Vec<f64> = w.iter().map(|v| v / cap).collect();
    let gamma = armijo_with(f, z, &w_hat, &grad, cfg.gamma0)?;
    let next = axpy(z, -gamma, &w_hat);
    Ok((
        next,
        StepRecord {
            delta_index: choice.index,
            gamma,
            direction: w_hat,
            grad_norm,
        },
    ))
}

fn stationary_record(dim: usize) -> StepRecord {
    StepRecord {
        delta_index: 0,
        gamma: 0.0,
        direction: vec![0.0; dim],
        grad_norm: 0.0,
    }
}

fn determinant(a: &SymmetricMatrix) -> f64 {
    if a.dim() == 2 {
        return a.get(0, 0) * a.get(1, 1) - a.get(0, 1) * a.get(0, 1);
    }
    eigh(a).eigenvalues.iter().product()
}

/// One step of New Q-Newton: first `δ_j` making the shifted Hessian
/// nonsingular, then a full reflected step with no line search.
/// The exponent on `‖∇f‖` is taken from `cfg.tau` (the `1 + α` of the method).
pub fn nqn_step<F: ObjectiveFunction + ?Sized>(f: &F, z: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, StepRecord)> {
    let grad = f.gradient(z);
    let grad_norm = norm(&grad);
    if grad_norm == 0.0 {
        return Ok((z.to_vec(), stationary_record(z.len())));
    }
    let hess = f.hessian(z);
    let scale = grad_norm.powf(cfg.tau);
    let (index, matrix) = cfg
        .deltas
        .iter()
        .enumerate()
        .map(|(j, &d)| (j, hess.shifted(d * scale)))
        .find(|(_, a)| determinant(a) != 0.0)
        .ok_or(Error::NoAdmissibleDelta {
            count: cfg.deltas.len(),
        })?;
    let w = reflected_direction_from(&eigh(&matrix), &grad)?;
    Ok((
        axpy(z, -1.0, &w),
        StepRecord {
            delta_index: index,
            gamma: 1.0,
            direction: w,
            grad_norm,
        },
    ))
}

/// Classical Newton step for optimization, `z − (∇²F)⁻¹ ∇F`.
pub fn newton_opt_step<F: ObjectiveFunction + ?Sized>(f: &F, z: &[f64]) -> Result<Vec<f64>> {
    let v = solve_symmetric(&f.hessian(z), &f.gradient(z))?;
    Ok(axpy(z, -1.0, &v))
}

/// Backtracking gradient descent along `∇f / max{1, θ‖∇f‖}`.
pub fn btgd_step<F: ObjectiveFunction + ?Sized>(
    f: &F,
    z: &[f64],
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, StepRecord)> {
    let grad = f.gradient(z);
    let grad_norm = norm(&grad);
    if grad_norm == 0.0 {
        return Ok((z.to_vec(), stationary_record(z.len())));
    }
    let cap = 1f64.max(cfg.theta * grad_norm);
    let w_hat: Vec<f64> = grad.iter().map(|g| g / cap).collect();
    let gamma = armijo_with(f, z, &w_hat, &grad, cfg.gamma0)?;
    Ok((
        axpy(z, -gamma, &w_hat),
        StepRecord {
            delta_index: 0,
            gamma,
            direction: w_hat,
            grad_norm,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    NewtonOpt,
    Nqn,
    BnqnNewVariant,
    BacktrackingGd,
    Newton1D,
    RandomRelaxedNewton1D(RelaxationDisk),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::NewtonOpt => "newton",
            Method::Nqn => "nqn",
            Method::BnqnNewVariant => "bnqn",
            Method::BacktrackingGd => "btgd",
            Method::Newton1D => "newton1d",
            Method::RandomRelaxedNewton1D(_) => "rrn1d",
        }
    }

    fn is_one_dimensional(&self) -> bool {
        matches!(self, Method::Newton1D | Method::RandomRelaxedNewton1D(_))
    }
}

/// Full record of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    /// `z_0 .. z_n`; one more entry than the per-step lists.
    pub points: Vec<Vec<f64>>,
    pub step_sizes: Vec<f64>,
    pub delta_indices: Vec<usize>,
    pub grad_norms: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
    /// `‖∇F‖` at the last point.
    pub final_grad_norm: f64,
    pub terminal: LimitClass,
    pub converged: bool,
    /// Diagnostic when a step failed.
    pub error: Option<String>,
}

impl IterationTrace {
    fn start(z0: &[f64]) -> Self {
        Self {
            points: vec![z0.to_vec()],
            step_sizes: Vec::new(),
            delta_indices: Vec::new(),
            grad_norms: Vec::new(),
            directions: Vec::new(),
            final_grad_norm: f64::NAN,
            terminal: LimitClass::Undecided,
            converged: false,
            error: None,
        }
    }

    fn push(&mut self, next: Vec<f64>, rec: StepRecord) {
        self.points.push(next);
        self.step_sizes.push(rec.gamma);
        self.delta_indices.push(rec.delta_index);
        self.grad_norms.push(rec.grad_norm);
        self.directions.push(rec.direction);
    }

    pub fn iterations(&self) -> usize {
        self.step_sizes.len()
    }

    pub fn last(&self) -> &[f64] {
        self.points.last().expect("trace always holds the initial point")
    }

    /// CSV with header `k,x,y,gamma,delta_index,grad_norm` and a trailing
    /// `# terminal=<class>` line. The final point has empty step columns.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,x,y,gamma,delta_index,grad_norm")?;
        let coord = |p: &[f64], i: usize| p.get(i).map(|&v| fmt_num(v)).unwrap_or_default();
        for k in 0..self.iterations() {
            let p = &self.points[k];
            writeln!(
                out,
                "{k},{},{},{},{},{}",
                coord(p, 0),
                coord(p, 1),
                fmt_num(self.step_sizes[k]),
                self.delta_indices[k],
                fmt_num(self.grad_norms[k])
            )?;
        }
        let n = self.iterations();
        let p = self.last();
        writeln!(
            out,
            "{n},{},{},,,{}",
            coord(p, 0),
            coord(p, 1),
            fmt_num(self.final_grad_norm)
        )?;
        writeln!(out, "# terminal={}", self.terminal)
    }

    pub fn export_csv(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = std::fs::File::create(path).map_err(io)?;
        let mut buf = std::io::BufWriter::new(file);
        self.write_csv(&mut buf).map_err(io)?;
        buf.flush().map_err(io)
    }
}

fn one_d_step(
    poly: &crate::complexpoly::Polynomial,
    z: &[f64],
    method: Method,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, StepRecord)> {
    let w = Complex::new(z[0], z[1]);
    let next = match method {
        Method::RandomRelaxedNewton1D(disk) => relaxed_newton_map(poly, w, sample_relaxed_alpha(disk, rng))?,
        _ => newton_map_1d(poly, w)?,
    };
    let next = vec![next.re, next.im];
    Ok((
        next.clone(),
        StepRecord {
            delta_index: 0,
            gamma: 1.0,
            direction: vec![z[0] - next[0], z[1] - next[1]],
            grad_norm: f64::NAN,
        },
    ))
}

/// Iterates `method` from `z0` until `‖∇f‖ ≤ grad_tol`, divergence, or the
/// iteration cap. Step failures end the run with a diagnostic in the trace.
pub fn run<F: ObjectiveFunction + ?Sized>(f: &F, z0: &[f64], method: Method, cfg: &SolverConfig) -> IterationTrace {
    let mut trace = IterationTrace::start(z0);
    if z0.len() != f.dimension() {
        trace.error = Some(
            Error::DimensionMismatch {
                expected: f.dimension(),
                got: z0.len(),
            }
            .to_string(),
        );
        return trace;
    }
    let poly = f.as_poly_modulus();
    if method.is_one_dimensional() && poly.is_none() {
        trace.error = Some("one-variable methods need a polynomial objective".into());
        return trace;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
    let radius = f.divergence_radius();
    let mut diverged = false;
    let mut z = z0.to_vec();
    loop {
        let grad_norm = norm(&f.gradient(&z));
        trace.final_grad_norm = grad_norm;
        if !grad_norm.is_finite() || z.iter().any(|v| !v.is_finite()) || norm(&z) > radius {
            diverged = true;
            break;
        }
        if grad_norm <= cfg.grad_tol {
            trace.converged = true;
            break;
        }
        if trace.iterations() >= cfg.max_iter {
            break;
        }
        let step = match method {
            Method::BnqnNewVariant => bnqn_step(f, &z, cfg),
            Method::Nqn => nqn_step(f, &z, cfg),
            Method::BacktrackingGd => btgd_step(f, &z, cfg),
            Method::NewtonOpt => newton_opt_step(f, &z).map(|next| {
                let direction = z.iter().zip(&next).map(|(a, b)| a - b).collect();
                (
                    next,
                    StepRecord {
                        delta_index: 0,
                        gamma: 1.0,
                        direction,
                        grad_norm,
                    },
                )
            }),
            Method::Newton1D | Method::RandomRelaxedNewton1D(_) => {
                let p = poly.expect("checked above").polynomial();
                one_d_step(p, &z, method, &mut rng).map(|(next, mut rec)| {
                    rec.grad_norm = grad_norm;
                    (next, rec)
                })
            }
        };
        match step {
            Ok((next, rec)) => {
                z = next.clone();
                trace.push(next, rec);
            }
            Err(e) => {
                trace.error = Some(e.to_string());
                break;
            }
        }
    }
    trace.terminal = if diverged {
        LimitClass::Diverged
    } else if trace.converged {
        poly.map(|p| p.classify_limit(&z, cfg.classify_tol))
            .unwrap_or(LimitClass::Undecided)
    } else {
        LimitClass::Undecided
    };
    trace
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexpoly::Polynomial;
    use crate::objective::{BilinearTestObjective, PolyModulusObjective, QuadraticObjective};

    struct HalfSquare;

    impl ObjectiveFunction for HalfSquare {
        fn dimension(&self) -> usize {
            1
        }
        fn value(&self, z: &[f64]) -> f64 {
            0.5 * z[0] * z[0]
        }
        fn gradient(&self, z: &[f64]) -> Vec<f64> {
            vec![z[0]]
        }
        fn hessian(&self, _z: &[f64]) -> SymmetricMatrix {
            SymmetricMatrix::identity(1)
        }
    }

    fn pmo(coeffs: &[f64]) -> PolyModulusObjective {
        PolyModulusObjective::new(Polynomial::from_real(coeffs)).unwrap()
    }

    fn cfg_with(deltas: &[f64], tau: f64) -> SolverConfig {
        SolverConfig {
            deltas: deltas.to_vec(),
            tau,
            ..SolverConfig::default_for(deltas.len() - 1)
        }
    }

    #[test]
    fn defaults_in_the_plane() {
        let cfg = SolverConfig::default_for(2);
        assert_eq!(cfg.deltas, vec![0.0, 1.0, -1.0]);
        assert_eq!(cfg.kappa(), 0.5);
        assert_eq!((cfg.tau, cfg.theta, cfg.gamma0), (1.0, 0.0, 1.0));
        assert!(cfg.validate(2).is_ok());
        assert!(cfg.validate(3).is_err());
        let mut dup = cfg.clone();
        dup.deltas = vec![0.0, 1.0, 1.0];
        assert!(dup.validate(2).is_err());
    }

    #[test]
    fn random_deltas_are_separated() {
        let d = random_deltas(4, 9);
        assert_eq!(d.len(), 5);
        for i in 0..d.len() {
            for j in i + 1..d.len() {
                assert!((d[i] - d[j]).abs() >= 0.1);
            }
        }
        assert_eq!(d, random_deltas(4, 9));
    }

    #[test]
    fn select_delta_examples() {
        let c = select_delta(
            &SymmetricMatrix::from_diagonal(&[0.0, 2.0]),
            1.0,
            &cfg_with(&[0.0, 1.0, 2.0], 1.0),
        )
        .unwrap();
        assert_eq!(c.index, 1);
        assert_eq!(c.matrix, SymmetricMatrix::from_diagonal(&[1.0, 3.0]));

        let c = select_delta(
            &SymmetricMatrix::from_diagonal(&[-2.0, 2.0]),
            1e-12,
            &cfg_with(&[0.0, 0.3, -0.4], 1.0),
        )
        .unwrap();
        assert_eq!(c.index, 0);

        let c = select_delta(
            &SymmetricMatrix::from_diagonal(&[-1.0, -1.0]),
            1.0,
            &cfg_with(&[1.0, 2.0, 3.0], 1.0),
        )
        .unwrap();
        assert_eq!(c.index, 1);
        assert_eq!(c.matrix, SymmetricMatrix::from_diagonal(&[1.0, 1.0]));

        // fewer than m + 1 candidates can run out
        let err = select_delta(
            &SymmetricMatrix::from_diagonal(&[-1.0, -2.0]),
            1.0,
            &cfg_with(&[1.0, 2.0], 1.0),
        );
        assert!(matches!(err, Err(Error::NoAdmissibleDelta { count: 2 })));
    }

    #[test]
    fn armijo_examples() {
        assert_eq!(armijo_search(&HalfSquare, &[1.0], &[1.0], 1.0).unwrap(), 1.0);
        assert_eq!(armijo_search(&HalfSquare, &[1.0], &[3.0], 1.0).unwrap(), 1.0 / 3.0);
        assert_eq!(
            armijo_search(&HalfSquare, &[1.0], &[1.0], 1.0 / 3.0).unwrap(),
            1.0 / 3.0
        );
        // a NaN direction never satisfies the test
        assert!(matches!(
            armijo_search(&HalfSquare, &[1.0], &[f64::NAN], 1.0),
            Err(Error::LineSearchUnderflow(_))
        ));
    }

    #[test]
    fn bnqn_step_on_real_axis_moves_toward_root() {
        let f = pmo(&[-1.0, 0.0, 1.0]);
        let mut cfg = SolverConfig::default_for(2);
        for theta in [0.0, 1.0] {
            cfg.theta = theta;
            for x in [0.05, 0.3, 0.5, 0.8, 0.99] {
                let (next, _) = bnqn_step(&f, &[x, 0.0], &cfg).unwrap();
                assert_eq!(next[1], 0.0);
                assert!(next[0] > x, "theta={theta} x={x} -> {next:?}");
            }
        }
    }

    #[test]
    fn bnqn_step_keeps_bisector() {
        let f = pmo(&[-1.0, 0.0, 1.0]);
        let cfg = SolverConfig::default_for(2);
        for y in [-3.0, -1.0, -0.2, 0.4, 1.0, 2.5] {
            let (next, _) = bnqn_step(&f, &[0.0, y], &cfg).unwrap();
            assert_eq!(next[0], 0.0);
        }
    }

    #[test]
    fn bnqn_step_double_root() {
        let f = pmo(&[0.0, 0.0, 1.0]);
        let cfg = SolverConfig {
            deltas: vec![0.0, 1.0, 2.0],
            ..SolverConfig::default_for(2)
        };
        let (next, rec) = bnqn_step(&f, &[1.0, 0.0], &cfg).unwrap();
        assert!(f.value(&next) < f.value(&[1.0, 0.0]));
        assert!(next[0] > 0.0 && next[0] < 1.0);
        // hand computation: H = diag(6, 2), grad = (2, 0), w = (1/3, 0), gamma = 1
        assert_eq!(rec.delta_index, 0);
        assert_eq!(rec.gamma, 1.0);
        assert!((next[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn nqn_examples() {
        let q = QuadraticObjective::new(
            SymmetricMatrix::from_rows(&[vec![3.0, 1.0], vec![1.0, 2.0]]),
            vec![1.0, -1.0],
        );
        let cfg = SolverConfig::default_for(2);
        let (next, _) = nqn_step(&q, &[4.0, -7.0], &cfg).unwrap();
        // minimizer solves H z = b: z = (3/5, -4/5)
        assert!((next[0] - 0.6).abs() < 1e-12 && (next[1] + 0.8).abs() < 1e-12);

        let (next, rec) = nqn_step(&BilinearTestObjective::plain(), &[1.0, 1.0], &cfg).unwrap();
        assert!(next.iter().all(|v| v.abs() < 1e-15), "{next:?}");
        assert!((rec.direction[0] - 1.0).abs() < 1e-15 && (rec.direction[1] - 1.0).abs() < 1e-15);

        let (next, _) = nqn_step(&pmo(&[-1.0, 0.0, 1.0]), &[2.0, 0.0], &cfg).unwrap();
        assert!((next[0] - (2.0 - 12.0 / 22.0)).abs() < 1e-15);
        assert_eq!(next[1], 0.0);
    }

    #[test]
    fn newton_opt_examples() {
        let q = QuadraticObjective::half_norm_squared(3);
        assert!(newton_opt_step(&q, &[1.0, -2.0, 5.0])
            .unwrap()
            .iter()
            .all(|v| *v == 0.0));
        let n = newton_opt_step(&BilinearTestObjective::plain(), &[1.0, 2.0]).unwrap();
        assert!(n.iter().all(|v| v.abs() < 1e-15));
        let n = newton_opt_step(&pmo(&[-1.0, 0.0, 1.0]), &[2.0, 0.0]).unwrap();
        assert!((n[0] - (2.0 - 12.0 / 22.0)).abs() < 1e-15);
        let sing = QuadraticObjective::new(SymmetricMatrix::from_diagonal(&[0.0, 1.0]), vec![1.0, 0.0]);
        assert!(matches!(
            newton_opt_step(&sing, &[1.0, 1.0]),
            Err(Error::SingularMatrix)
        ));
    }

    #[test]
    fn btgd_examples() {
        let cfg = SolverConfig::default_for(1);
        let (next, _) = btgd_step(&HalfSquare, &[1.0], &cfg).unwrap();
        assert_eq!(next, vec![0.0]);

        let f = pmo(&[-1.0, 0.0, 1.0]);
        let (next, _) = btgd_step(&f, &[0.0, 0.7], &SolverConfig::default_for(2)).unwrap();
        assert_eq!(next[0], 0.0);

        let q = QuadraticObjective::half_norm_squared(2);
        let cfg = SolverConfig {
            theta: 1.0,
            ..SolverConfig::default_for(2)
        };
        let (next, _) = btgd_step(&q, &[3.0, 4.0], &cfg).unwrap();
        assert!(norm(&next) < 5.0);
    }

    #[test]
    fn run_examples() {
        let cfg = SolverConfig::default_for(2);
        let sq = pmo(&[0.0, 0.0, 1.0]);
        let t = run(&sq, &[1.3, -0.4], Method::BnqnNewVariant, &cfg);
        assert!(t.converged);
        assert_eq!(t.terminal, LimitClass::Root(0));

        let f = pmo(&[-1.0, 0.0, 1.0]);
        let t = run(&f, &[0.0, 0.8], Method::BnqnNewVariant, &cfg);
        match t.terminal {
            LimitClass::CriticalNonRoot(c) => assert!(c.norm() < 1e-12),
            other => panic!("{other:?}"),
        }

        let t = run(&f, &[0.3, -1.7], Method::BnqnNewVariant, &cfg);
        assert_eq!(t.terminal, LimitClass::Root(1));
        assert_eq!(t.points.len(), t.iterations() + 1);
        assert!(t.grad_norms.iter().all(|g| *g > 0.0));
    }

    #[test]
    fn one_dimensional_methods_need_polynomial() {
        let t = run(
            &BilinearTestObjective::plain(),
            &[1.0, 1.0],
            Method::Newton1D,
            &SolverConfig::default_for(2),
        );
        assert!(t.error.is_some());
        let t = run(
            &pmo(&[-1.0, 0.0, 1.0]),
            &[2.0, 0.5],
            Method::Newton1D,
            &SolverConfig::default_for(2),
        );
        assert_eq!(t.terminal, LimitClass::Root(1));
    }

    #[test]
    fn trace_csv_layout() {
        let f = pmo(&[-1.0, 0.0, 1.0]);
        let t = run(&f, &[2.0, 0.0], Method::BnqnNewVariant, &SolverConfig::default_for(2));
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k,x,y,gamma,delta_index,grad_norm");
        assert_eq!(lines.len(), t.iterations() + 3);
        assert_eq!(*lines.last().unwrap(), "# terminal=Root(1)");
        assert!(lines[1].starts_with("0,2.0000000000000000e0,"));
    }
}
