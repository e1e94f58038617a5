use thiserror::Error;

/// Errors raised by the library. Hypothesis failures and solver outcomes are
/// not errors; they are carried in reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid exponent field: {0}")]
    InvalidExponent(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("norm root-finding did not converge after {0} iterations")]
    NormNotConverged(usize),

    /// Mountain-pass geometry could not be established.
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("hypothesis validation failed: {0}")]
    Validation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
