use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or configuration value violates a documented constraint.
    #[error("invalid {what}: {reason}")]
    Validation { what: String, reason: String },

    /// Malformed configuration text.
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    /// A numerical procedure failed where the theory says it cannot
    /// (singular implicit matrix, non-convergence, non-finite state).
    #[error("numerical alarm: {0}")]
    Numerical(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(what: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            what: what.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation { .. } | Error::Parse { .. } => 1,
            Error::Numerical(_) => 2,
            Error::Io { .. } => 3,
        }
    }
}
