use thiserror::Error;

/// Errors produced by the calex library.
#[derive(Debug, Error)]
pub enum CalexError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("scorer error: {0}")]
    Scorer(String),

    #[error("json error: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, CalexError>;

impl CalexError {
    /// Shorthand for an `InvalidData` error from anything displayable.
    pub fn data(msg: impl Into<String>) -> Self {
        CalexError::InvalidData(msg.into())
    }

    /// Shorthand for an `InvalidConfig` error.
    pub fn config(msg: impl Into<String>) -> Self {
        CalexError::InvalidConfig(msg.into())
    }
}
