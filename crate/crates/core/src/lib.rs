//! Backtracking New Q-Newton's method (BNQN) and its baselines for finding
//! roots of complex polynomials through `F(x, y) = |g(x + iy)|^2 / 2`.
//!
//! Modules, bottom up:
//!
//! - [`complexpoly`]: polynomial arithmetic, one-variable Newton maps, roots.
//! - [`linalg`]: small symmetric eigendecomposition and the reflected solve.
//! - [`objective`]: objective trait, the polynomial-modulus objective, test functions.
//! - [`solvers`]: NQN, BNQN (new variant), Newton, backtracking gradient descent.
//! - [`invariance`]: conjugation-invariance harnesses.
//! - [`basins`]: grid sweeps, analytic degree-two reference, PPM/CSV export.
//! - [`cli`]: the `bnqn` command line.

// `!(x <= y)` is how NaN gets rejected here; index loops mirror the math.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod basins;
pub mod cli;
pub mod complexpoly;
pub mod error;
pub mod invariance;
pub mod linalg;
pub mod objective;
pub mod solvers;

pub use error::{Error, Result};

/// Numbers in every text output carry 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Worker pool for sweeps; `BNQN_THREADS` caps the thread count.
pub fn worker_pool() -> rayon::ThreadPool {
    let threads = std::env::var("BNQN_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("failed to build worker pool")
}
