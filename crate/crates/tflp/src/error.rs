use std::path::PathBuf;

/// Failure of a front-end operation, mapped onto the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error(transparent)]
    Core(#[from] tflp_core::Error),
    #[error("{}: {msg}", path.display())]
    Io { path: PathBuf, msg: String },
    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: u64, msg: String },
    #[error("{0} verification check(s) failed")]
    VerifyFailed(usize),
}

/// Exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const PARAMETER: i32 = 2;
    pub const NUMERIC: i32 = 3;
    pub const IO: i32 = 4;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Param(_) => exit::PARAMETER,
            CliError::Core(e) if e.is_numeric() => exit::NUMERIC,
            CliError::Core(_) => exit::PARAMETER,
            CliError::Io { .. } | CliError::Parse { .. } => exit::IO,
            CliError::VerifyFailed(_) => exit::VERIFY_FAILED,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, e: impl std::fmt::Display) -> Self {
        CliError::Io { path: path.into(), msg: e.to_string() }
    }
}

pub type CliResult<T> = Result<T, CliError>;
