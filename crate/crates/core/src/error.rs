use thiserror::Error;

/// Errors shared by every layer of the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A construction would exceed a configured size limit.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// An argument is malformed or inconsistent with its partner arguments.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A value lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical procedure failed (non-convergence, singular system).
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Malformed tabular input; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
