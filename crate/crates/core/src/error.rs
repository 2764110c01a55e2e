//! Error type shared by the simulator modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    /// A numeric argument is outside the mathematical domain of the
    /// operation (negative variance, non-finite input, zero distance, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural precondition failed: mismatched dimensions, a
    /// non-symmetric RIS block, an odd element count, ...
    #[error("structural error: {0}")]
    Structure(String),

    /// An operation was called outside its lifecycle (e.g. `step` before
    /// `reset`).
    #[error("lifecycle error: {0}")]
    Lifecycle(String),

    /// A configuration failed validation.
    #[error("config error: {0}")]
    Config(String),
}

impl CoreError {
    pub fn domain(msg: impl Into<String>) -> Self {
        CoreError::Domain(msg.into())
    }

    pub fn structure(msg: impl Into<String>) -> Self {
        CoreError::Structure(msg.into())
    }

    pub fn lifecycle(msg: impl Into<String>) -> Self {
        CoreError::Lifecycle(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CoreError::Config(msg.into())
    }
}
