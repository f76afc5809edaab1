use thiserror::Error;

use crate::model::SecretTarget;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("secret target {target} is out of range for a {dim}-dimensional distribution")]
    TargetOutOfRange { target: SecretTarget, dim: usize },

    #[error("invalid secret spec: {0}")]
    InvalidSecretSpec(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid mechanism config: {0}")]
    InvalidConfig(String),

    #[error("secret {index} value {value} lies below its anchor {anchor}")]
    BelowAnchor {
        index: usize,
        value: f64,
        anchor: f64,
    },

    #[error("released standard deviation {value} for secret {index} is not positive")]
    NonPositiveStd { index: usize, value: f64 },

    #[error("column {column} has zero variance")]
    DegenerateColumn { column: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("sample count mismatch: {left} vs {right}")]
    SampleCountMismatch { left: usize, right: usize },

    #[error("exact empirical W2 is capped at {cap} samples (got {got}); use the sliced estimator")]
    OracleCapExceeded { cap: usize, got: usize },

    #[error("analytic formula requires 2*eps <= s; secret {index} has eps={eps}, s={length}")]
    ToleranceExceedsInterval { index: usize, eps: f64, length: f64 },

    #[error("privacy budget T={0} must lie in (0, 1)")]
    BudgetOutOfRange(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("noisy histogram for column {column} is empty after clipping")]
    EmptyHistogram { column: usize },

    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
