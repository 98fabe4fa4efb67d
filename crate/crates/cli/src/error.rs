use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] maxscore_core::Error),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },

    #[error("invalid config {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("{} already exists (pass --force to overwrite)", .0.display())]
    Exists(PathBuf),

    #[error("{0}")]
    Usage(String),

    #[error("cannot serialize report: {0}")]
    Serialize(String),
}

impl CliError {
    /// Exit status: 2 for bad input, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        let validation = match self {
            CliError::Core(e) => e.is_validation(),
            CliError::Read { .. }
            | CliError::Data { .. }
            | CliError::Config { .. }
            | CliError::Exists(_)
            | CliError::Usage(_) => true,
            CliError::Write { .. } | CliError::Serialize(_) => false,
        };
        if validation {
            2
        } else {
            1
        }
    }
}
