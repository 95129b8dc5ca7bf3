use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument left its documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Model parameters violate their invariants; one message per violation.
    #[error("invalid model spec: {}", .0.join("; "))]
    InvalidSpec(Vec<String>),

    /// An operation was asked of a model family that does not support it.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A conditional sample ended up empty or below the required size.
    #[error("insufficient exceedances: {0}")]
    InsufficientExceedances(String),

    /// A Monte Carlo running mean failed its stabilization check.
    #[error("empirical moment diverges: {0}")]
    DivergentMoment(String),

    /// Estimator-specific failure (nonpositive medians, bad k, ...).
    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
