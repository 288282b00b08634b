use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A central moment of the requested order does not exist for the law.
    #[error("moment of order {order} undefined for {law}")]
    MomentUndefined { law: String, order: u32 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// All pairwise distances are zero (or the data is otherwise degenerate).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// A data-dependent rule was invoked without the data it needs.
    #[error("missing data: {0}")]
    MissingData(String),

    /// Fewer than two h values; the variance estimate is undefined.
    #[error("too few pairs: got {pairs}, need at least 2")]
    TooFewPairs { pairs: usize },

    /// Every h value is identical, so the ratio being estimated is undefined.
    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("quadrature failed to converge (requested tol {tol:e})")]
    QuadratureNonConvergence { tol: f64 },

    /// Log-log fitting requires strictly positive coordinates.
    #[error("non-positive value: {0}")]
    NonPositiveValue(String),

    #[error("invalid config: {0}")]
    ConfigInvalid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {msg}")]
    ParseError { line: usize, msg: String },

    #[error("ragged rows at line {line}: expected {expected} columns, got {got}")]
    RaggedRows {
        line: usize,
        expected: usize,
        got: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
