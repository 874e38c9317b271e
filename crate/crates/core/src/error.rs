use thiserror::Error;

/// Errors produced by the clustering routines.
#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("degenerate mixture: {0}")]
    Degenerate(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ClusterError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(ClusterError::InvalidInput(msg.into()))
}
