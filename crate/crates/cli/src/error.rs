use thiserror::Error;

/// Command failure with its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or input; exit code 2.
    #[error("{0}")]
    Validation(String),
    /// Runs that cannot be paired for comparison; exit code 3.
    #[error("{0}")]
    Mismatch(String),
    /// Anything else, such as an I/O failure; exit code 1.
    #[error(transparent)]
    Runtime(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Mismatch(_) => 3,
        }
    }
}

pub fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}
