use flexsky::Error as CoreError;

/// Failure of a CLI command, carrying its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::OracleMismatch(_) => 4,
        }
    }

    /// Wraps a core error, prefixing it with where it happened.
    pub fn core(context: impl std::fmt::Display, err: CoreError) -> Self {
        match err {
            CoreError::NumericalFailure(_) | CoreError::LpStructure(_) => {
                CliError::Numerical(format!("{context}: {err}"))
            }
            other => CliError::Data(format!("{context}: {other}")),
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError::Data(format!("{}: {err}", path.display()))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
