//! Crate-wide error type.
//!
//! Variants are grouped by how the CLI maps them to exit codes: invalid
//! parameters or malformed inputs (exit 2), exceeded resource caps (exit 3),
//! and I/O failures (exit 4).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A structural invariant of a code spec, map, plan, or input file is
    /// violated.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A configured resource cap (signature budget, graph size cap, tree
    /// width) was exceeded before the computation finished.
    #[error("resource cap exceeded: {0}")]
    CapExceeded(String),

    /// Underlying I/O failure, annotated with the path that caused it.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Malformed serialized data (JSON plans, checkpoint files, ...).
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn cap(msg: impl Into<String>) -> Self {
        Error::CapExceeded(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code used by the CLI for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid(_) | Error::Parse(_) => 2,
            Error::CapExceeded(_) => 3,
            Error::Io { .. } => 4,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
