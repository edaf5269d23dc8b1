use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the library. Each variant maps onto one of the
/// CLI exit codes through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate data in column \"{column}\": zero variance leaves no inherent noise to calibrate against")]
    Degenerate { column: String },

    #[error("too few uncompromised records: {uncompromised} remain after removing the compromised fraction (need at least 2)")]
    TooFewUncompromised { uncompromised: usize },

    #[error("parse error at row {row}, column \"{column}\": {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error in {path}: {message}")]
    Csv { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attaches a column name to a degenerate-data error raised by a
    /// column-agnostic routine.
    pub fn in_column(self, name: &str) -> Self {
        match self {
            Error::Degenerate { .. } => Error::Degenerate {
                column: name.to_string(),
            },
            other => other,
        }
    }

    /// 2 usage/config, 3 mathematical/domain, 4 I/O (including unreadable input files).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Domain(_) | Error::Degenerate { .. } | Error::TooFewUncompromised { .. } => 3,
            Error::Parse { .. } | Error::Io { .. } | Error::Csv { .. } => 4,
        }
    }
}
