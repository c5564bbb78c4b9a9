use std::path::PathBuf;

use svperc_core::Error as CoreError;

/// Process exit codes. The numbering is a stable contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Io = 1,
    Infeasible = 2,
    InsufficientData = 3,
    InvariantFailure = 4,
    Usage = 5,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("invariant failed: {0}")]
    Invariant(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Io { .. } | CliError::Format { .. } => ExitStatus::Io,
            CliError::Invariant(_) => ExitStatus::InvariantFailure,
            CliError::Usage(_) => ExitStatus::Usage,
            CliError::Core(e) => match e {
                CoreError::Infeasible { .. } => ExitStatus::Infeasible,
                CoreError::InsufficientData { .. }
                | CoreError::NoMaximizer { .. }
                | CoreError::UndefinedRatio { .. } => ExitStatus::InsufficientData,
                CoreError::Table(_) => ExitStatus::Io,
                _ => ExitStatus::Usage,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
