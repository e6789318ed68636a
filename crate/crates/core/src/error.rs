use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the engine can report. [`Error::code`] maps each variant onto
/// the stable machine-readable vocabulary shared by the CLI and HTTP service.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Validation(String),

    #[error("terms not in vocabulary: {}", .terms.join(", "))]
    OutOfVocabulary { terms: Vec<String> },

    #[error("vocabulary is empty: no token occurs at least {min_count} times")]
    EmptyVocabulary { min_count: u64 },

    #[error("{kind} '{name}' already exists")]
    Conflict { kind: &'static str, name: String },

    #[error(
        "{kind} '{name}' is at version {current}, request was made against version {expected}"
    )]
    VersionConflict {
        kind: &'static str,
        name: String,
        expected: u64,
        current: u64,
    },

    #[error("{kind} '{name}' not found")]
    NotFound { kind: &'static str, name: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("training diverged: non-finite vector component after epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Validation(_) | Error::EmptyVocabulary { .. } | Error::Diverged { .. } => {
                "VALIDATION"
            }
            Error::OutOfVocabulary { .. } => "OOV_TERM",
            Error::Conflict { .. } => "CONFLICT",
            Error::VersionConflict { .. } => "VERSION_CONFLICT",
            Error::NotFound { .. } => "NOT_FOUND",
            Error::Parse { .. } => "PARSE",
            Error::Io { .. } => "IO",
        }
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
