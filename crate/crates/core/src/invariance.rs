//! Conjugation invariance harnesses.
//!
//! Running the backtracking method on `G(z) = F(Az)` from `A⁻¹z₀` tracks
//! `A⁻¹` times the run on `F` when `A = cR` with `R` orthogonal, provided the
//! shifts become `δ c^{2−τ}` and `θ` becomes `cθ`. Newton's method tracks for
//! every invertible `A`. The shear example shows the restriction on `A` matters
//! for the backtracking method.

use rand::Rng;

use crate::error::{Error, Result};
use crate::fmt_num;
use crate::linalg::{norm, reflected_direction, Matrix, SymmetricMatrix};
use crate::objective::{BilinearTestObjective, ObjectiveFunction};
use crate::solvers::{bnqn_step, newton_opt_step, SolverConfig};

/// `A = cR` with `c > 0` and `R Rᵀ = Id`.
#[derive(Debug, Clone)]
pub struct ConjugationSpec {
    c: f64,
    r: Matrix,
}

impl ConjugationSpec {
    pub fn new(c: f64, r: Matrix) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidConfig(format!("scale must be positive, got {c}")));
        }
        let residual = r.orthogonality_residual();
        if !(residual <= 1e-12) {
            return Err(Error::InvalidConfig(format!(
                "R is not orthogonal (residual {residual:e})"
            )));
        }
        Ok(Self { c, r })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn rotation(&self) -> &Matrix {
        &self.r
    }

    /// `cR`
    pub fn matrix(&self) -> Matrix {
        self.r.scaled(self.c)
    }

    /// `c⁻¹ Rᵀ`
    pub fn inverse(&self) -> Matrix {
        self.r.transpose().scaled(1.0 / self.c)
    }
}

/// Random orthogonal matrix by Gram-Schmidt on entries uniform in `[-1, 1]`.
/// The determinant sign is left free, so reflections occur.
pub fn random_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix {
    loop {
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
        let mut ok = true;
        for _ in 0..dim {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            for _ in 0..2 {
                for q in &cols {
                    let proj: f64 = crate::linalg::dot(q, &v);
                    v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= proj * qi);
                }
            }
            let n = norm(&v);
            if n < 1e-6 {
                ok = false;
                break;
            }
            cols.push(v.into_iter().map(|x| x / n).collect());
        }
        if ok {
            let mut m = Matrix::zeros(dim);
            for (j, col) in cols.iter().enumerate() {
                for (i, &v) in col.iter().enumerate() {
                    m.set(i, j, v);
                }
            }
            return m;
        }
    }
}

/// `G(z) = F(Az)` with the chain-rule gradient and Hessian.
pub struct ConjugatedObjective<'a, F: ?Sized> {
    base: &'a F,
    a: Matrix,
}

impl<'a, F: ObjectiveFunction + ?Sized> ConjugatedObjective<'a, F> {
    pub fn new(base: &'a F, a: Matrix) -> Result<Self> {
        if a.dim() != base.dimension() {
            return Err(Error::DimensionMismatch {
                expected: base.dimension(),
                got: a.dim(),
            });
        }
        Ok(Self { base, a })
    }

    pub fn linear_map(&self) -> &Matrix {
        &self.a
    }
}

impl<F: ObjectiveFunction + ?Sized> ObjectiveFunction for ConjugatedObjective<'_, F> {
    fn dimension(&self) -> usize {
        self.base.dimension()
    }

    fn value(&self, z: &[f64]) -> f64 {
        self.base.value(&self.a.mul_vec(z))
    }

    fn value_change(&self, z: &[f64], z_new: &[f64]) -> f64 {
        self.base.value_change(&self.a.mul_vec(z), &self.a.mul_vec(z_new))
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        self.a.transpose_mul_vec(&self.base.gradient(&self.a.mul_vec(z)))
    }

    fn hessian(&self, z: &[f64]) -> SymmetricMatrix {
        self.a.congruence(&self.base.hessian(&self.a.mul_vec(z)))
    }

    fn divergence_radius(&self) -> f64 {
        self.base.divergence_radius() / self.a.frobenius_norm().max(f64::MIN_POSITIVE)
    }
}

/// Rescales shifts by `c^{2−τ}` and `θ` by `c`; everything else is kept.
pub fn transform_config(cfg: &SolverConfig, c: f64) -> SolverConfig {
    let factor = c.powf(2.0 - cfg.tau);
    SolverConfig {
        deltas: cfg.deltas.iter().map(|d| d * factor).collect(),
        theta: cfg.theta * c,
        ..cfg.clone()
    }
}

fn deviation(z_prime: &[f64], a_inv: &Matrix, z: &[f64]) -> f64 {
    let mapped = a_inv.mul_vec(z);
    let diff: Vec<f64> = z_prime.iter().zip(&mapped).map(|(p, q)| p - q).collect();
    norm(&diff) / (1.0 + norm(z))
}

/// Paired backtracking runs on `F` and on `F ∘ (cR)`; returns
/// `max_k ‖z_k′ − A⁻¹z_k‖ / (1 + ‖z_k‖)` over at most `steps` steps.
/// Stops early once either side reaches its gradient tolerance.
pub fn check_invariance<F: ObjectiveFunction + ?Sized>(
    f: &F,
    spec: &ConjugationSpec,
    z0: &[f64],
    cfg: &SolverConfig,
    steps: usize,
) -> Result<f64> {
    let g = ConjugatedObjective::new(f, spec.matrix())?;
    let cfg_g = transform_config(cfg, spec.c());
    let a_inv = spec.inverse();
    let mut z = z0.to_vec();
    let mut zp = a_inv.mul_vec(z0);
    let mut worst = deviation(&zp, &a_inv, &z);
    for _ in 0..steps {
        if norm(&f.gradient(&z)) <= cfg.grad_tol || norm(&g.gradient(&zp)) <= cfg_g.grad_tol {
            break;
        }
        z = bnqn_step(f, &z, cfg)?.0;
        zp = bnqn_step(&g, &zp, &cfg_g)?.0;
        worst = worst.max(deviation(&zp, &a_inv, &z));
    }
    Ok(worst)
}

/// Same deviation metric for Newton's method, which needs only `A` invertible.
pub fn newton_conjugacy_check<F: ObjectiveFunction + ?Sized>(
    f: &F,
    a: &Matrix,
    z0: &[f64],
    steps: usize,
) -> Result<f64> {
    let a_inv = a.inverse()?;
    let g = ConjugatedObjective::new(f, a.clone())?;
    let mut z = z0.to_vec();
    let mut zp = a_inv.mul_vec(z0);
    let mut worst = deviation(&zp, &a_inv, &z);
    for _ in 0..steps {
        z = newton_opt_step(f, &z)?;
        zp = newton_opt_step(&g, &zp)?;
        worst = worst.max(deviation(&zp, &a_inv, &z));
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShearReport {
    /// Direction for `G = (x + y) y` at the point.
    pub w_prime: Vec<f64>,
    /// `A⁻¹ w₀`, with `w₀` the direction for `F = xy` at `A · point`.
    pub mapped_w: Vec<f64>,
    /// `|sin|` of the angle between the two.
    pub parallelism_defect: f64,
}

impl ShearReport {
    pub fn to_key_values(&self) -> String {
        format!(
            "w_prime={},{}\nmapped_w={},{}\nparallelism_defect={}\n",
            fmt_num(self.w_prime[0]),
            fmt_num(self.w_prime[1]),
            fmt_num(self.mapped_w[0]),
            fmt_num(self.mapped_w[1]),
            fmt_num(self.parallelism_defect)
        )
    }
}

/// Compares the unshifted directions for `F = xy` and its shear conjugate
/// `G(z) = F(Az)`, `A = [[1, 1], [0, 1]]`.
pub fn shear_counterexample(point: [f64; 2]) -> Result<ShearReport> {
    let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]);
    let a_inv = a.inverse()?;
    let f = BilinearTestObjective::plain();
    let g = BilinearTestObjective::sheared();
    let moved = a.mul_vec(&point);
    let w0 = reflected_direction(&f.hessian(&moved), &f.gradient(&moved))?;
    let mapped_w = a_inv.mul_vec(&w0);
    let w_prime = reflected_direction(&g.hessian(&point), &g.gradient(&point))?;
    let cross = w_prime[0] * mapped_w[1] - w_prime[1] * mapped_w[0];
    let parallelism_defect = cross.abs() / (norm(&w_prime) * norm(&mapped_w));
    Ok(ShearReport {
        w_prime,
        mapped_w,
        parallelism_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexpoly::Polynomial;
    use crate::objective::PolyModulusObjective;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z2m1() -> PolyModulusObjective {
        PolyModulusObjective::new(Polynomial::from_real(&[-1.0, 0.0, 1.0])).unwrap()
    }

    #[test]
    fn transform_config_examples() {
        let cfg = SolverConfig {
            deltas: vec![0.0, 1.0, 2.0],
            tau: 1.0,
            theta: 0.5,
            ..SolverConfig::default_for(2)
        };
        let t = transform_config(&cfg, 2.0);
        assert_eq!(t.deltas, vec![0.0, 2.0, 4.0]);
        assert_eq!(t.theta, 1.0);
        assert_eq!(t.kappa(), 2.0 * cfg.kappa());

        let cfg2 = SolverConfig {
            tau: 2.0,
            ..cfg.clone()
        };
        assert_eq!(transform_config(&cfg2, 3.7).deltas, cfg2.deltas);
        assert_eq!(transform_config(&cfg, 1.0), cfg);
    }

    #[test]
    fn spec_rejects_non_orthogonal() {
        assert!(ConjugationSpec::new(1.0, Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]])).is_err());
        assert!(ConjugationSpec::new(0.0, Matrix::identity(2)).is_err());
        assert!(ConjugationSpec::new(2.0, Matrix::rotation2(0.3)).is_ok());
    }

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for dim in [2, 3, 5] {
            assert!(random_orthogonal(dim, &mut rng).orthogonality_residual() < 1e-13);
        }
    }

    #[test]
    fn invariance_examples() {
        let f = z2m1();
        let cfg = SolverConfig::default_for(2);
        let rot = ConjugationSpec::new(1.0, Matrix::rotation2(std::f64::consts::FRAC_PI_2)).unwrap();
        assert!(check_invariance(&f, &rot, &[0.4, 1.1], &cfg, 100).unwrap() <= 1e-8);
        let scale = ConjugationSpec::new(2.0, Matrix::identity(2)).unwrap();
        assert!(check_invariance(&f, &scale, &[0.4, 1.1], &cfg, 100).unwrap() <= 1e-8);
        let id = ConjugationSpec::new(1.0, Matrix::identity(2)).unwrap();
        assert_eq!(check_invariance(&f, &id, &[0.4, 1.1], &cfg, 100).unwrap(), 0.0);
    }

    #[test]
    fn newton_conjugacy_examples() {
        let shear = Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]);
        let d = newton_conjugacy_check(&BilinearTestObjective::plain(), &shear, &[1.0, 2.0], 1).unwrap();
        assert!(d <= 1e-12);
        assert_eq!(
            newton_conjugacy_check(&z2m1(), &Matrix::identity(2), &[1.3, 0.7], 20).unwrap(),
            0.0
        );
        let diag = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 0.5]]);
        assert!(newton_conjugacy_check(&z2m1(), &diag, &[1.3, 0.7], 20).unwrap() <= 1e-9);
    }

    #[test]
    fn shear_example_at_one_two() {
        let r = shear_counterexample([1.0, 2.0]).unwrap();
        assert!((r.mapped_w[0] + 1.0).abs() < 1e-14 && (r.mapped_w[1] - 3.0).abs() < 1e-14);
        // independent route: v' = (x, y) = (1, 2) split along the displayed eigenvectors
        let s2 = std::f64::consts::SQRT_2;
        let u1 = [-1.0 + s2, 1.0];
        let u2 = [-1.0 - s2, 1.0];
        let n1 = u1[0] * u1[0] + u1[1] * u1[1];
        let n2 = u2[0] * u2[0] + u2[1] * u2[1];
        let c1 = (u1[0] * 1.0 + u1[1] * 2.0) / n1;
        let c2 = (u2[0] * 1.0 + u2[1] * 2.0) / n2;
        // u1 has eigenvalue 1 + sqrt2 > 0, u2 has 1 - sqrt2 < 0
        let expected = [c1 * u1[0] - c2 * u2[0], c1 * u1[1] - c2 * u2[1]];
        assert!(
            (r.w_prime[0] - expected[0]).abs() < 1e-13,
            "{:?} vs {expected:?}",
            r.w_prime
        );
        assert!((r.w_prime[1] - expected[1]).abs() < 1e-13);
        assert!(r.parallelism_defect > 0.01);
        assert!(r.to_key_values().contains("parallelism_defect="));
    }
}
