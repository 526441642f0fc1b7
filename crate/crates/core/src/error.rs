use perplex_stats::StatsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Stats(#[from] StatsError),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("unscoreable document {0}: abstract is empty")]
    Unscoreable(String),

    #[error("invalid perplexity input: {0}")]
    InvalidLogprobs(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
