//! Error type shared across the library.
//!
//! The variants are grouped by how a frontend should react to them:
//! configuration and domain problems are caller mistakes, parse and
//! structural problems describe bad input files, `Io` wraps the underlying
//! filesystem failure with the path that triggered it.

use std::path::Path;

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration (bad scenario field, inconsistent scene).
    #[error("configuration error: {0}")]
    Config(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Query outside the valid range of a grid or image.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// Malformed file content at a known location.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// File content is syntactically fine but internally inconsistent.
    #[error("{path}: {msg}")]
    Structure { path: String, msg: String },

    /// Filesystem failure, tagged with the offending path.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Failure while producing an image.
    #[error("render error: {0}")]
    Render(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn out_of_range(msg: impl Into<String>) -> Self {
        Error::OutOfRange(msg.into())
    }

    pub fn parse(path: &Path, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.display().to_string(),
            line,
            msg: msg.into(),
        }
    }

    pub fn structure(path: &Path, msg: impl Into<String>) -> Self {
        Error::Structure {
            path: path.display().to_string(),
            msg: msg.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
