use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument is outside the operation's domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A function was evaluated where it is not defined (e.g. a missing
    /// entry of a tabular function).
    #[error("domain error: {0}")]
    Domain(String),

    /// An enumeration would exceed its configured size cap.
    #[error("{what} has {size} elements, above the configured cap of {cap}")]
    Capacity { what: String, size: String, cap: u64 },

    /// The operation has no closed form for the given function kind.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
