use std::path::PathBuf;

use invasionlab_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },
    #[error("integration blow-up: {0}")]
    Blowup(CoreError),
    #[error("missing data: {0}")]
    MissingData(String),
    #[error("solver failure: {0}")]
    Solver(CoreError),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl ToString) -> Self {
        CliError::Config { path: path.into(), message: message.to_string() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Blowup(_) => 3,
            CliError::MissingData(_) => 4,
            CliError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => 4,
            CliError::Solver(_) => 5,
            CliError::Io { .. } => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Blowup { .. } => CliError::Blowup(e),
            CoreError::InvalidParams(m) => CliError::config("params", m),
            CoreError::InvalidInput(m) => CliError::config("input", m),
            CoreError::InsufficientData(_) | CoreError::GridMismatch { .. } => CliError::MissingData(e.to_string()),
            _ => CliError::Solver(e),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
