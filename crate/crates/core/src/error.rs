use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Array sizes or grid layouts do not fit together.
    #[error("shape error: {0}")]
    Shape(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("overflow: {0}")]
    Overflow(String),

    /// A required input is missing or inconsistent with other inputs.
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("{path}:{line}: {message}")]
    Config {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{0}")]
    Solver(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps a solver failure with the context of the run that produced it.
    pub fn with_context(self, context: &str) -> Self {
        match self {
            Error::Singular(m) => Error::Solver(format!("singular system ({context}): {m}")),
            Error::Overflow(m) => Error::Solver(format!("overflow ({context}): {m}")),
            Error::Solver(m) => Error::Solver(format!("{context}: {m}")),
            other => other,
        }
    }
}
