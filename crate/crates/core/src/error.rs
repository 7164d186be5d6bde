//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QmaError {
    #[error("pfaffian requires an even dimension, got {0}")]
    OddDimension(usize),

    #[error("matrix is not skew-symmetric: |A + A^T| = {0:.3e} at ({1},{2})")]
    NotSkew(f64, usize, usize),

    #[error("hyperhermitian invariant violated at entry ({l},{k}): {detail}")]
    InvalidHyperhermitian { l: usize, k: usize, detail: String },

    #[error("eigenvalue pairing failed: gap {gap:.3e} exceeds tolerance {tol:.3e}")]
    EigenPairing { gap: f64, tol: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("solver did not converge after {iterations} iterations, residual {residual:.3e} (history: {history})")]
    NonConvergence { iterations: usize, residual: f64, history: String },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, QmaError>;
