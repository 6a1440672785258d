use thiserror::Error;

/// Errors produced anywhere in the core crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("correlation coefficient for pair ({i}, {j}) has magnitude {magnitude} > 1")]
    InvalidCoefficient { i: usize, j: usize, magnitude: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("invalid correlation matrix: {0}")]
    InvalidMatrix(String),

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    ConvergenceFailure { sweeps: usize, off_norm: f64 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("method {method} does not apply: {reason}")]
    MethodMismatch { method: &'static str, reason: String },

    #[error("empty input")]
    EmptyInput,

    #[error("no methods requested")]
    EmptyMethods,

    #[error("search grid has more than {cap} points at {resolution_db} dB; try {suggested_db} dB")]
    BudgetExplosion {
        cap: usize,
        resolution_db: f64,
        suggested_db: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
