use std::path::PathBuf;

use thiserror::Error;

/// Failures surfaced by the command-line front end, each with a fixed exit
/// code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Library(#[from] fockqi::Error),

    #[error("I/O failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// 2: bad arguments or configuration; 3: numerical-integrity failure;
    /// 4: I/O failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Library(e) if e.is_numerical() => 3,
            CliError::Library(fockqi::Error::ImpossibleOutcome) => 3,
            CliError::Library(_) => 2,
            CliError::Io { .. } => 4,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
