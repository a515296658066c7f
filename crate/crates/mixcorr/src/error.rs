//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("correlation must be finite with |rho| < 1, got {0}")]
    InvalidRho(f64),

    #[error("{what} must lie in {range}, got {value}")]
    Domain {
        what: &'static str,
        range: &'static str,
        value: f64,
    },

    #[error("sample is empty")]
    EmptySample,

    #[error("non-finite value at position {index}")]
    NonFiniteValue { index: usize },

    #[error("value {value} was never observed in the fitted column")]
    ValueNotObserved { value: f64 },

    #[error("degenerate pair: {0}")]
    Degenerate(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("csv parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("models with more than three variables are not supported here (got {0})")]
    TooManyVariables(usize),

    #[error("truth matrix has no nonzero (or no zero) off-diagonal entries; ROC is undefined")]
    DegenerateTruth,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
