use ptel_core::Error as CoreError;

/// Stable process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Ok = 0,
    Failure = 1,
    Input = 2,
    NonConvergence = 3,
    Regime = 4,
    Degenerate = 5,
}

impl ExitCode {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Oracle(#[from] ptel_oracle::OracleError),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Failure(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Self::Io { path: path.as_ref().display().to_string(), source }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Core(e) => match e {
                CoreError::NonConvergence { .. } => ExitCode::NonConvergence,
                CoreError::RegimeViolation(_) => ExitCode::Regime,
                CoreError::DegenerateNonlocal { .. } => ExitCode::Degenerate,
                CoreError::InvalidParams(_)
                | CoreError::ArgumentOutOfRange { .. }
                | CoreError::DomainError(_)
                | CoreError::InvalidData(_)
                | CoreError::Parse(_)
                | CoreError::Eval(_) => ExitCode::Input,
                CoreError::QuadratureFailure(_) | CoreError::SingularStep { .. } | CoreError::MaxIterExceeded { .. } => ExitCode::Failure,
            },
            Self::Oracle(ptel_oracle::OracleError::NonConvergence(_)) => ExitCode::NonConvergence,
            Self::Oracle(_) => ExitCode::Failure,
            Self::Input(_) | Self::Io { .. } => ExitCode::Input,
            Self::Failure(_) => ExitCode::Failure,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
