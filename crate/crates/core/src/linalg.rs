//! Small dense symmetric linear algebra.
//!
//! Everything here is sized for the handful of dimensions the optimizers work
//! in (m <= 16). The 2x2 case uses a closed form; larger matrices use cyclic
//! Jacobi sweeps.

use crate::error::{Error, Result};

/// Real symmetric `m x m` matrix stored as a packed upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    packed: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            packed: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Builds from a full row-major matrix, reading only the upper triangle.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, rows[i][j]);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.dim - i * (i + 1) / 2 + j
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[self.index(i, j)]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.index(i, j);
        self.packed[k] = value;
    }

    /// `self + shift * Id`
    pub fn shifted(&self, shift: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            let d = m.get(i, i);
            m.set(i, i, d + shift);
        }
        m
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.get(i, j).powi(2);
            }
        }
        s.sqrt()
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.set(i, j, self.get(i, j));
            }
        }
        m
    }
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "matrix must be square");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    /// Counter-clockwise rotation of the plane by `angle` radians.
    pub fn rotation2(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::from_rows(&[vec![c, -s], vec![s, c]])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn mul(&self, other: &Matrix) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, (0..n).map(|k| self.get(i, k) * other.get(k, j)).sum());
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// `selfᵀ · v`
    pub fn transpose_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.get(i, j) * v[i]).sum())
            .collect()
    }

    /// `selfᵀ · S · self`, returned as a symmetric matrix.
    pub fn congruence(&self, s: &SymmetricMatrix) -> SymmetricMatrix {
        let n = self.dim;
        let sa = s.to_dense().mul(self);
        let mut out = SymmetricMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                out.set(i, j, (0..n).map(|k| self.get(k, i) * sa.get(k, j)).sum());
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.dim;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.frobenius_norm().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a.get(r, col).abs().total_cmp(&a.get(s, col).abs()))
                .unwrap_or(col);
            if a.get(pivot, col).abs() <= f64::EPSILON * scale {
                return Err(Error::SingularMatrix);
            }
            for j in 0..n {
                a.data.swap(col * n + j, pivot * n + j);
                inv.data.swap(col * n + j, pivot * n + j);
            }
            let p = a.get(col, col);
            for j in 0..n {
                a.set(col, j, a.get(col, j) / p);
                inv.set(col, j, inv.get(col, j) / p);
            }
            for r in 0..n {
                if r != col {
                    let f = a.get(r, col);
                    if f != 0.0 {
                        for j in 0..n {
                            a.set(r, j, a.get(r, j) - f * a.get(col, j));
                            inv.set(r, j, inv.get(r, j) - f * inv.get(col, j));
                        }
                    }
                }
            }
        }
        Ok(inv)
    }

    /// Residual `‖M Mᵀ − Id‖_F`.
    pub fn orthogonality_residual(&self) -> f64 {
        let mut r = self.mul(&self.transpose());
        for i in 0..self.dim {
            r.set(i, i, r.get(i, i) - 1.0);
        }
        r.frobenius_norm()
    }
}

/// Spectral factorization `A = Q Λ Qᵀ` with ascending eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column-major: column `i` (a contiguous slice) pairs with eigenvalue `i`.
    vectors: Vec<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, i: usize) -> &[f64] {
        let m = self.dim();
        &self.vectors[i * m..(i + 1) * m]
    }

    /// `Q Λ Qᵀ`
    pub fn reconstruct(&self) -> SymmetricMatrix {
        let m = self.dim();
        let mut out = SymmetricMatrix::zeros(m);
        for r in 0..m {
            for c in r..m {
                let v = (0..m)
                    .map(|k| self.eigenvalues[k] * self.eigenvector(k)[r] * self.eigenvector(k)[c])
                    .sum();
                out.set(r, c, v);
            }
        }
        out
    }

    /// `‖QᵀQ − Id‖_F`
    pub fn orthonormality_residual(&self) -> f64 {
        let m = self.dim();
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                let d: f64 = dot(self.eigenvector(i), self.eigenvector(j));
                let target = if i == j { 1.0 } else { 0.0 };
                s += (d - target).powi(2);
            }
        }
        s.sqrt()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Full eigendecomposition of a symmetric matrix.
pub fn eigh(a: &SymmetricMatrix) -> EigenDecomposition {
    let m = a.dim();
    let (values, mut vectors) = match m {
        0 => (Vec::new(), Vec::new()),
        1 => (vec![a.get(0, 0)], vec![1.0]),
        2 => eigh2(a.get(0, 0), a.get(0, 1), a.get(1, 1)),
        _ => jacobi(a),
    };
    // sign convention: first nonzero component of each eigenvector is positive
    for col in vectors.chunks_mut(m.max(1)) {
        if let Some(&first) = col.iter().find(|v| **v != 0.0) {
            if first < 0.0 {
                col.iter_mut().for_each(|v| *v = -*v);
            }
        }
    }
    EigenDecomposition {
        eigenvalues: values,
        vectors,
    }
}

fn eigh2(a: f64, b: f64, d: f64) -> (Vec<f64>, Vec<f64>) {
    if b == 0.0 {
        return if a <= d {
            (vec![a, d], vec![1.0, 0.0, 0.0, 1.0])
        } else {
            (vec![d, a], vec![0.0, 1.0, 1.0, 0.0])
        };
    }
    let mean = 0.5 * (a + d);
    let radius = (0.5 * (a - d)).hypot(b);
    // larger eigenvector at angle phi with tan(2 phi) = 2b / (a - d)
    let phi = 0.5 * (2.0 * b).atan2(a - d);
    let (s, c) = phi.sin_cos();
    (vec![mean - radius, mean + radius], vec![-s, c, c, s])
}

fn jacobi(a: &SymmetricMatrix) -> (Vec<f64>, Vec<f64>) {
    const MAX_SWEEPS: usize = 100;
    let m = a.dim();
    let mut w = a.to_dense();
    let mut v = Matrix::identity(m);
    let scale = a.frobenius_norm();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| w.get(i, j).powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..m - 1 {
            for q in p + 1..m {
                let apq = w.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (w.get(q, q) - w.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let wkp = w.get(k, p);
                    let wkq = w.get(k, q);
                    w.set(k, p, c * wkp - s * wkq);
                    w.set(k, q, s * wkp + c * wkq);
                }
                for k in 0..m {
                    let wpk = w.get(p, k);
                    let wqk = w.get(q, k);
                    w.set(p, k, c * wpk - s * wqk);
                    w.set(q, k, s * wpk + c * wqk);
                }
                for k in 0..m {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| w.get(i, i).total_cmp(&w.get(j, j)));
    let values = order.iter().map(|&i| w.get(i, i)).collect();
    let vectors = order
        .iter()
        .flat_map(|&col| (0..m).map(move |row| (row, col)))
        .map(|(row, col)| v.get(row, col))
        .collect();
    (values, vectors)
}

/// Spectral radius: largest absolute eigenvalue.
pub fn sp(a: &SymmetricMatrix) -> f64 {
    eigh(a).eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max)
}

/// Smallest absolute eigenvalue; zero exactly when `a` is singular.
pub fn minsp(a: &SymmetricMatrix) -> f64 {
    minsp_of(&eigh(a))
}

pub(crate) fn minsp_of(e: &EigenDecomposition) -> f64 {
    e.eigenvalues.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min)
}

/// `pr₊(A⁻¹g) − pr₋(A⁻¹g)`, computed as `Q |Λ|⁻¹ Qᵀ g`.
pub fn reflected_direction(a: &SymmetricMatrix, grad: &[f64]) -> Result<Vec<f64>> {
    reflected_direction_from(&eigh(a), grad)
}

pub(crate) fn reflected_direction_from(e: &EigenDecomposition, grad: &[f64]) -> Result<Vec<f64>> {
    spectral_apply(e, grad, f64::abs)
}

/// `A⁻¹ g` through the eigendecomposition.
pub fn solve_symmetric(a: &SymmetricMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    spectral_apply(&eigh(a), rhs, |l| l)
}

fn spectral_apply(e: &EigenDecomposition, v: &[f64], map: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    let m = e.dim();
    if v.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: v.len(),
        });
    }
    if minsp_of(e) == 0.0 {
        return Err(Error::SingularMatrix);
    }
    let mut out = vec![0.0; m];
    for k in 0..m {
        let q = e.eigenvector(k);
        let coeff = dot(q, v) / map(e.eigenvalues[k]);
        for (o, &qi) in out.iter_mut().zip(q) {
            *o += qi * coeff;
        }
    }
    Ok(out)
}
