use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// The input could not be parsed; `location` names the line or frame.
    #[error("format error at {location}: {message}")]
    Format { location: String, message: String },

    /// Parsed input that violates a data-model invariant.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("empty selection: no landmark belongs to regions {0}")]
    EmptySelection(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("index {index} out of range for {len} frames")]
    IndexOutOfRange { index: usize, len: usize },

    /// Essential (infinite) classes can only be matched with each other.
    #[error("H{dim} essential class counts differ: {left} vs {right}")]
    EssentialMismatch { dim: u8, left: usize, right: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            location: location.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable tag, used in CLI and HTTP error bodies.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
            Error::Validation(_) => "validation",
            Error::EmptySelection(_) => "empty_selection",
            Error::Parameter(_) => "parameter",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::EssentialMismatch { .. } => "essential_mismatch",
        }
    }
}
