use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] sumstat_privacy::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{mechanism} at hyperparameter {value} (repeat {repeat}): {source}")]
    GridPoint {
        mechanism: String,
        value: f64,
        repeat: usize,
        #[source]
        source: sumstat_privacy::Error,
    },

    #[error("unsupported table format: {0}")]
    Format(String),
}
