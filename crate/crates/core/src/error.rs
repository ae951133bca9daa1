use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by library operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A metric whose value is undefined for the given inputs (e.g. weighted
    /// coverage of an empty ground truth).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// Malformed file contents. `offset` is the byte position of the first
    /// offending byte.
    #[error("{}: {msg} at byte {offset}", path.display())]
    Format {
        path: PathBuf,
        offset: usize,
        msg: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// The fit produced a non-finite loss value.
    #[error("non-finite loss at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
