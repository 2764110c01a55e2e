//! Error type for the learning stack.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RlError {
    #[error("structural error: {0}")]
    Structure(String),

    #[error("precondition error: {0}")]
    Precondition(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl RlError {
    pub fn structure(msg: impl Into<String>) -> Self {
        RlError::Structure(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        RlError::Precondition(msg.into())
    }

    pub fn checkpoint(msg: impl Into<String>) -> Self {
        RlError::Checkpoint(msg.into())
    }
}
