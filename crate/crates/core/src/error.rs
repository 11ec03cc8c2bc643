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

    #[error("line {line}: invalid `{field}`: {message}")]
    Record {
        line: usize,
        field: String,
        message: String,
    },

    #[error("duplicate listing id `{0}`")]
    DuplicateListing(String),

    #[error("unknown fallback tagger `{0}` (expected one of: shape, none)")]
    UnknownFallback(String),

    #[error("no rules fall into any bin; choose thresholds manually")]
    EmptySweep,

    #[error("invalid world configuration: {0}")]
    InvalidConfig(String),

    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn record(line: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Record {
            line,
            field: field.into(),
            message: message.into(),
        }
    }
}
