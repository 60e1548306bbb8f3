//! Error type shared by all library modules.

use std::path::PathBuf;

/// Errors produced by the segmentation toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed or inconsistent input data (dimension mismatches, labels out
    /// of range, non-finite samples, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A parameter outside its admissible range (eps <= 0, lambda < 0, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation that needs at least one pixel was handed an empty segment.
    #[error("empty segment: {0}")]
    EmptySegment(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A file does not conform to its format; `detail` names the offending
    /// field or byte offset.
    #[error("{}: {detail}", path.display())]
    Format { path: PathBuf, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn format(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
