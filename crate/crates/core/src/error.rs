use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = BcvError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum BcvError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("graph is empty: {0}")]
    EmptyGraph(String),

    #[error("could not draw nonempty communities after {retries} attempts")]
    EmptyCommunity { retries: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("unknown setting `{0}`")]
    UnknownSetting(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
