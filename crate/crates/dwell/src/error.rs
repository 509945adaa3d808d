use thiserror::Error;

/// Errors produced while loading or operating on double-well instances.
#[derive(Debug, Error)]
pub enum DwellError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix A is not symmetric: |A - A^T| = {deviation:e} exceeds tolerance {tolerance:e}")]
    Asymmetric { deviation: f64, tolerance: f64 },

    #[error("matrix B must have at least one nonzero entry")]
    ZeroB,

    #[error("invalid instance field `{field}`: {reason}")]
    InvalidField { field: String, reason: String },

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("matrix is not positive definite (min eigenvalue {min_eig:e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("dual function undefined at sigma = {sigma}: nonzero numerator on a pole index")]
    DualDomain { sigma: f64 },

    #[error("infeasible lambda: component {index} violates lambda_i + phi_i^2/2 >= 0")]
    InfeasibleLambda { index: usize },

    #[error("internal inconsistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, DwellError>;
