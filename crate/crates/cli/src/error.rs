use std::path::PathBuf;

use sse_core::SseError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Input { path: PathBuf, source: SseError },

    #[error("numerical failure: {0}")]
    Numerical(#[from] SseError),

    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Output { .. } => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
