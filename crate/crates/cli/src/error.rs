use mhrev::MhError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invariant violated: {0}")]
    Invariant(#[from] MhError),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0} checks out of tolerance")]
    Mismatch(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Mismatch(_) => 1,
            CliError::Parse(_) | CliError::Io(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
