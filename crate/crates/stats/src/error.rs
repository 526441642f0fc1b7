use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("empty sample")]
    Empty,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("design matrix is rank deficient; dependent columns: {}", .0.join(", "))]
    RankDeficient(Vec<String>),

    #[error("separation detected: {0}")]
    Separation(String),

    #[error("failed to converge after {iterations} iterations: {detail}")]
    NonConvergence { iterations: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, StatsError>;
