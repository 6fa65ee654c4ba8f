use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Failures mapped onto the process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config files or inputs (exit 2).
    #[error("{0}")]
    Config(String),
    /// Failures while computing or writing results (exit 3).
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn config(context: &str, e: impl std::fmt::Display) -> Self {
        CliError::Config(format!("{context}: {e}"))
    }

    pub fn runtime(context: &str, e: impl std::fmt::Display) -> Self {
        CliError::Runtime(format!("{context}: {e}"))
    }
}
