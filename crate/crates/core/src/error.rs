use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A caller-supplied argument violates an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A digit or label index fell outside its range.
    #[error("index out of range: {0}")]
    Index(String),

    /// The guaranteed output magnitude does not fit the exact integer capacity.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Malformed input document.
    #[error("parse error: {0}")]
    Parse(String),

    /// An internal invariant was broken. Indicates a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
