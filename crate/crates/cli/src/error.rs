use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] lepage_core::Error),

    #[error("cannot access {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    /// 0 success, 1 usage or configuration, 2 IO, 3 failed verification.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Core(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Verification(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// IO failures inside the csv crate keep exit code 2; everything else
    /// is malformed input.
    pub fn csv(path: impl Into<PathBuf>, err: csv::Error) -> Self {
        let path = path.into();
        match err.into_kind() {
            csv::ErrorKind::Io(source) => CliError::Io { path, source },
            other => CliError::Config(format!("{}: {other:?}", path.display())),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
