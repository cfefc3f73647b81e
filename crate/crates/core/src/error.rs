use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    #[error("{kind} not found: {id}")]
    NotFound { kind: &'static str, id: String },

    /// An edit was based on a version that is no longer current.
    #[error("version conflict: current version is {current}")]
    VersionConflict { current: u32 },

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("members may not review their own translations")]
    SelfReview,

    #[error("{0}")]
    State(String),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("corrupt state file {}: {message}", path.display())]
    Corrupt { path: PathBuf, message: String },

    #[error("data directory {} is locked by another process", .0.display())]
    Locked(PathBuf),
}

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn not_found(kind: &'static str, id: impl Into<String>) -> Self {
        Error::NotFound {
            kind,
            id: id.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn from_json(err: &serde_json::Error) -> Self {
        Error::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }

    /// Stable machine-readable code used by the HTTP error envelope.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } | Error::Validation { .. } | Error::SelfReview => "validation",
            Error::NotFound { .. } => "not_found",
            Error::VersionConflict { .. } | Error::Conflict(_) => "conflict",
            Error::State(_) => "state",
            Error::Io { .. } | Error::Corrupt { .. } | Error::Locked(_) => "internal",
        }
    }

    /// True for failures of the environment rather than of the request.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Corrupt { .. } | Error::Locked(_))
    }
}

/// Rejects strings that are empty after trimming.
pub(crate) fn require_text(field: &str, value: &str) -> Result<()> {
    if value.trim().is_empty() {
        Err(Error::validation(field, "must not be empty"))
    } else {
        Ok(())
    }
}
