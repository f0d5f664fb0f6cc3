use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    BadInput(String),
    #[error("no bilinear form of length {0}; supply one with --forms or pass --allow-naive")]
    MissingForm(usize),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Format { path: PathBuf, line: usize, msg: String },
    #[error(transparent)]
    Core(#[from] cfft_core::Error),
}

impl CliError {
    /// Process exit status: 1 for verification failures, 3 for missing
    /// forms, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) | CliError::Core(cfft_core::Error::OracleMismatch { .. }) => 1,
            CliError::MissingForm(_) | CliError::Core(cfft_core::Error::MissingForm(_)) => 3,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
