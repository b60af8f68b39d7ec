use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate document id {0:?}")]
    DuplicateId(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("document {id:?} has {tokens} tokens, over the cap of {cap}")]
    DocumentTooLong { id: String, tokens: usize, cap: usize },

    #[error("document {0:?} not found")]
    NotFound(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("n-gram has no content words after stop-word filtering")]
    NoContentWords,

    #[error("distance undefined: {0}")]
    UndefinedDistance(&'static str),

    #[error("index integrity check failed: {0}")]
    Integrity(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
