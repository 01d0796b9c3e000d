use std::path::Path;

use thiserror::Error;

/// Failures surfaced to the operator. Each maps to a stable exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or inconsistent input: exit code 2.
    #[error("{0}")]
    Input(String),

    /// A validation check or an analysis point failed: exit code 1.
    #[error("{0}")]
    CheckFailed(String),

    #[error(transparent)]
    Model(#[from] uavcov::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Model(e) if e.is_input_error() => 2,
            CliError::CheckFailed(_) | CliError::Model(_) | CliError::Io { .. } => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
