use thiserror::Error;

/// Errors raised by the library.
///
/// Axiom failures and λ validation failures are report content, not errors;
/// this type covers misconfigured experiments only.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {value} is outside the domain of the {metric} partial metric ({domain})")]
    Domain {
        metric: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("index {index} is beyond the end of a table of length {len}")]
    Index { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lambda sequence invalid at n={n}: {reason}")]
    Validation { n: usize, reason: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("table load failed: {0}")]
    Load(String),
}

pub type Result<T> = std::result::Result<T, Error>;
