use std::path::PathBuf;

use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("points too close: separation {distance:.3e} m is below the guard {guard:.3e} m")]
    Singularity { distance: f64, guard: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("resource limit: {what} (estimated {bytes} bytes)")]
    Resource { what: String, bytes: u128 },
    #[error("numerical failure: {message} (condition estimate {condition:.3e})")]
    Numerical { message: String, condition: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 config, 3 numerical, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Argument(_) | Error::Config(_) => 2,
            Error::Io { .. } => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
