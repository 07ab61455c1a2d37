//! Crate-wide error type and its process exit-code mapping.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Invalid inputs or violated data contracts (bad corpora, dimension
    /// mismatches, infeasible requests).
    #[error("{0}")]
    Data(String),

    /// Numerical failures (degenerate posteriors, non-finite objectives).
    #[error("{0}")]
    Numerical(String),
}

impl Error {
    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// Process exit code: 2 for data errors, 3 for numerical failures.
    /// Usage errors (exit 1) are handled by the CLI before any `Error` exists.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Parse { .. } | Error::Data(_) => 2,
            Error::Numerical(_) => 3,
        }
    }
}
