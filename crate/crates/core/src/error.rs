use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the numerical routines and the CLI plumbing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("derivative vanishes at z = {re}{im:+}i (exceptional point of the Newton map)")]
    DerivativeVanishes { re: f64, im: f64 },
    #[error("pole hit at {0}")]
    PoleHit(String),
    #[error("root finder did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("no admissible delta among {count} candidates")]
    NoAdmissibleDelta { count: usize },
    #[error("line search underflow: step size fell below {0:e}")]
    LineSearchUnderflow(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
