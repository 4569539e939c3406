use thiserror::Error;

/// Failures of a CLI run, each mapped to an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] pssmp::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 usage, 2 domain or assumption, 3 horizon.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(pssmp::Error::Parse(_)) => 1,
            CliError::Core(pssmp::Error::HorizonExceeded { .. }) => 3,
            CliError::Core(_) | CliError::Io(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
