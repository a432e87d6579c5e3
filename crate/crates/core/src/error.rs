use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Exhaustive enumeration was requested beyond its size guard.
    #[error("size limit exceeded: {what} requires n <= {limit}, got n = {n}")]
    Size {
        what: &'static str,
        limit: usize,
        n: usize,
    },

    /// A closed form hit a parameter where it is undefined.
    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    /// A result that should be impossible under the model (signals a formula bug).
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    #[error("{file}: row {row}: {message}")]
    Data {
        file: String,
        row: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn data(file: impl Into<String>, row: usize, message: impl Into<String>) -> Self {
        Error::Data {
            file: file.into(),
            row,
            message: message.into(),
        }
    }
}
