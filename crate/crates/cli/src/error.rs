use std::path::PathBuf;

use circxi::Error as CoreError;

/// Failures surfaced to the shell, each with a fixed exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("{message}")]
    Ties { message: String },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Usage(_) => 2,
            CliError::Ties { .. } => 3,
            CliError::Core(CoreError::TiesPresent { .. }) => 3,
            CliError::Core(CoreError::SampleTooSmall { .. }) => 4,
            CliError::Core(_) => 2,
            CliError::Io { .. } => 5,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
