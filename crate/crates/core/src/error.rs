//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("graph parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("solver failure: {message} (max triangle violation {max_triangle_violation:.3e}, normalization residual {normalization_residual:.3e})")]
    SolverFailure {
        message: String,
        max_triangle_violation: f64,
        normalization_residual: f64,
    },

    #[error("randomness failure: {attempts} attempts exhausted: {message}")]
    RandomnessFailure { attempts: usize, message: String },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("extraction failure: {0}")]
    ExtractionFailure(String),

    #[error("sampling failure after {attempts} attempts: {message}")]
    SamplingFailure { attempts: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
