//! Complex polynomials and the classical one-variable iteration maps.
//!
//! Coefficients are stored lowest degree first. The textual form used on the
//! command line is a comma-separated list of `re+imi` terms in the same order,
//! so `"-1,0,1"` is `z^2 - 1`.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

pub use num_complex::Complex64 as Complex;

/// Builds a complex number, rejecting NaN and infinities.
pub fn checked_complex(re: f64, im: f64) -> Result<Complex> {
    if re.is_finite() && im.is_finite() {
        Ok(Complex::new(re, im))
    } else {
        Err(Error::InvalidConfig(format!("non-finite complex value {re}{im:+}i")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex>,
}

impl Polynomial {
    /// Trailing zero coefficients are dropped, so the leading coefficient of
    /// a nonzero polynomial is always nonzero.
    pub fn new(mut coeffs: Vec<Complex>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex::new(c, 0.0)).collect())
    }

    /// `c * (z - a) * (z - b) * ...`
    pub fn from_roots(scale: Complex, roots: &[Complex]) -> Self {
        let mut coeffs = vec![scale];
        for &r in roots {
            let mut next = vec![Complex::new(0.0, 0.0); coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * r;
            }
            coeffs = next;
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the polynomial; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Complex {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Cauchy bound `1 + max |a_i / a_n|`: every root lies in the disk of
    /// this radius.
    pub fn cauchy_bound(&self) -> f64 {
        let lead = self.leading();
        if self.degree() == 0 || lead == Complex::new(0.0, 0.0) {
            return 1.0;
        }
        1.0 + self.coeffs[..self.degree()]
            .iter()
            .map(|c| (c / lead).norm())
            .fold(0.0, f64::max)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex) -> Complex {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// `c * p(z)`
    pub fn scaled(&self, c: Complex) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// `p(a * z)`
    pub fn compose_scale(&self, a: Complex) -> Polynomial {
        let mut power = Complex::new(1.0, 0.0);
        let mut out = Vec::with_capacity(self.coeffs.len());
        for &c in &self.coeffs {
            out.push(c * power);
            power *= a;
        }
        Polynomial::new(out)
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::new(Vec::new());
        }
        let mut out = vec![Complex::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    /// Coefficients of `h -> p(z + h)`, by repeated synthetic division.
    pub fn taylor_at(&self, z: Complex) -> Polynomial {
        let mut b = self.coeffs.clone();
        let n = b.len();
        for k in 0..n {
            for i in (k..n - 1).rev() {
                let carry = z * b[i + 1];
                b[i] += carry;
            }
        }
        Polynomial::new(b)
    }

    /// `p(z + h) - p(z)` without cancellation against `p(z)`.
    pub fn increment(&self, z: Complex, h: Complex) -> Complex {
        let t = self.taylor_at(z);
        t.coeffs
            .iter()
            .skip(1)
            .rev()
            .fold(Complex::new(0.0, 0.0), |acc, &c| acc * h + c)
            * h
    }

    /// Parses a lowest-first comma-separated coefficient list.
    pub fn parse(text: &str) -> Result<Polynomial> {
        let coeffs = text.split(',').map(parse_complex).collect::<Result<Vec<_>>>()?;
        Ok(Polynomial::new(coeffs))
    }

    /// Parses a highest-first coefficient list, the order humans usually write.
    pub fn parse_highest_first(text: &str) -> Result<Polynomial> {
        let mut coeffs = text.split(',').map(parse_complex).collect::<Result<Vec<_>>>()?;
        coeffs.reverse();
        Ok(Polynomial::new(coeffs))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write_complex(f, *c)?;
        }
        Ok(())
    }
}

fn write_complex(f: &mut fmt::Formatter<'_>, c: Complex) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "{}", c.re)
    } else if c.im.is_sign_negative() {
        write!(f, "{}-{}i", c.re, -c.im)
    } else {
        write!(f, "{}+{}i", c.re, c.im)
    }
}

/// Parses `re`, `imi`, or `re+imi` / `re-imi`.
pub fn parse_complex(text: &str) -> Result<Complex> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("invalid complex number {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    let real = |t: &str| t.parse::<f64>().map_err(|_| bad());
    let imag = |t: &str| match t {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => real(t),
    };
    let value = if let Some(body) = s.strip_suffix('i') {
        // the split sign is the last +/- that is neither leading nor part of an exponent
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        match split {
            Some(k) => Complex::new(real(&body[..k])?, imag(&body[k..])?),
            None => Complex::new(0.0, imag(body)?),
        }
    } else {
        Complex::new(real(&s)?, 0.0)
    };
    checked_complex(value.re, value.im)
}

fn pole_tolerance(p: &Polynomial, z: Complex) -> f64 {
    1e-14 * (1.0 + z.norm()).powi(p.degree().saturating_sub(1) as i32)
}

/// One step of Newton's method `z - p(z)/p'(z)`.
pub fn newton_map_1d(p: &Polynomial, z: Complex) -> Result<Complex> {
    relaxed_newton_map(p, z, Complex::new(1.0, 0.0))
}

/// Relaxed Newton step `z - alpha * p(z)/p'(z)`.
pub fn relaxed_newton_map(p: &Polynomial, z: Complex, alpha: Complex) -> Result<Complex> {
    let dp = p.derivative().eval(z);
    if dp.norm() < pole_tolerance(p, z) {
        return Err(Error::DerivativeVanishes { re: z.re, im: z.im });
    }
    Ok(z - alpha * p.eval(z) / dp)
}

/// Disk `{alpha : |alpha - 1| <= rho}` with `0.5 < rho < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationDisk {
    rho: f64,
}

impl RelaxationDisk {
    pub fn new(rho: f64) -> Result<Self> {
        if rho > 0.5 && rho < 1.0 {
            Ok(Self { rho })
        } else {
            Err(Error::InvalidConfig(format!(
                "relaxation radius must satisfy 0.5 < rho < 1, got {rho}"
            )))
        }
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// Draws `alpha` uniformly (w.r.t. area) from the relaxation disk by rejection
/// from the bounding square.
pub fn sample_relaxed_alpha<R: Rng + ?Sized>(disk: RelaxationDisk, rng: &mut R) -> Complex {
    let rho = disk.rho;
    loop {
        let u = rng.gen_range(-rho..=rho);
        let v = rng.gen_range(-rho..=rho);
        if u * u + v * v <= rho * rho {
            return Complex::new(1.0 + u, v);
        }
    }
}

/// Newton map of `z^2 - 1` restricted to the imaginary axis, in the
/// coordinate `z = iy`: `y -> (y^2 - 1) / (2y)`.
pub fn bisector_newton_map(y: f64) -> Result<f64> {
    if y == 0.0 {
        return Err(Error::PoleHit("y = 0".into()));
    }
    Ok((y * y - 1.0) / (2.0 * y))
}

/// `|phi(N(z)) - phi(z)^2|` for the Newton map `N` of `z^2 - 1` and the
/// Mobius map `phi(z) = (z - 1)/(z + 1)`. Zero up to roundoff.
pub fn schroder_conjugacy_defect(z: Complex) -> Result<f64> {
    const EXCLUSION: f64 = 1e-12;
    if (z + 1.0).norm() <= EXCLUSION {
        return Err(Error::PoleHit(format!("z = {z} is the pole of phi")));
    }
    if z.norm() <= EXCLUSION {
        return Err(Error::PoleHit(format!("z = {z} is the pole of the Newton map")));
    }
    let p = Polynomial::from_real(&[-1.0, 0.0, 1.0]);
    let n = newton_map_1d(&p, z).map_err(|_| Error::PoleHit(format!("z = {z}")))?;
    let phi = |w: Complex| (w - 1.0) / (w + 1.0);
    Ok((phi(n) - phi(z) * phi(z)).norm())
}

const ROOT_MAX_ITER: usize = 1000;

/// All `degree` roots of `p` (with multiplicity) by Durand-Kerner iteration.
///
/// Roots come back sorted by real part, ties broken by imaginary part, so
/// indices are stable across calls.
pub fn all_roots(p: &Polynomial, tol: f64) -> Result<Vec<Complex>> {
    let n = p.degree();
    if p.is_zero() || n == 0 {
        return Err(Error::InvalidConfig("all_roots needs degree >= 1".into()));
    }
    let lead = p.leading();
    let monic: Vec<Complex> = p.coeffs().iter().map(|c| c / lead).collect();
    let eval_monic = |z: Complex| monic.iter().rev().fold(Complex::new(0.0, 0.0), |acc, &c| acc * z + c);

    let mut roots: Vec<Complex> = if n == 1 {
        vec![-monic[0]]
    } else {
        let bound = p.cauchy_bound();
        let seed = Complex::new(0.4, 0.9);
        (0..n).map(|k| seed.powu(k as u32) * bound).collect()
    };

    if n > 1 {
        for _ in 0..ROOT_MAX_ITER {
            let mut max_rel_step: f64 = 0.0;
            for i in 0..n {
                let zi = roots[i];
                let mut den = Complex::new(1.0, 0.0);
                for (j, &zj) in roots.iter().enumerate() {
                    if j != i {
                        den *= zi - zj;
                    }
                }
                if den == Complex::new(0.0, 0.0) {
                    den = Complex::new(f64::EPSILON, f64::EPSILON);
                }
                let step = eval_monic(zi) / den;
                roots[i] = zi - step;
                max_rel_step = max_rel_step.max(step.norm() / (1.0 + roots[i].norm()));
            }
            if max_rel_step <= 4.0 * f64::EPSILON {
                break;
            }
        }
    }

    let scale = p.max_coeff_norm();
    let within = roots.iter().all(|&r| {
        r.re.is_finite() && r.im.is_finite() && p.eval(r).norm() <= tol * (1.0 + r.norm()).powi(n as i32) * scale
    });
    if !within {
        return Err(Error::NoConvergence {
            iterations: ROOT_MAX_ITER,
        });
    }
    sort_roots(&mut roots);
    Ok(roots)
}

pub(crate) fn sort_roots(roots: &mut [Complex]) {
    // real parts rounded so conjugate pairs with roundoff-level differences order by imaginary part
    let key = |z: &Complex| ((z.re * 1e9).round() as i64, z.im);
    roots.sort_by(|a, b| {
        let (ka, kb) = (key(a), key(b));
        ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    });
}
