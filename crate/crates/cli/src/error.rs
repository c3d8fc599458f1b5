use thiserror::Error;

/// Failures of a command, each mapped to a stable exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid arguments or configuration (exit code 2).
    #[error("configuration error: {0}")]
    Config(String),
    /// A numerical procedure ran out of budget or overflowed (exit code 3).
    #[error("numerical failure: {0}")]
    Numeric(cflimits::Error),
    /// Reading or writing a file failed (exit code 4).
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// At least one verification check exceeded its tolerance (exit code 5).
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Verification(_) => 5,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }
}

impl From<cflimits::Error> for CliError {
    /// Budget exhaustion and overflow are numerical failures; every other
    /// library error means the supplied data violates a precondition.
    fn from(e: cflimits::Error) -> Self {
        use cflimits::Error as E;
        match e {
            E::NoConvergenceWithinBudget { .. }
            | E::SeriesNotConverged(_)
            | E::UnboundedMProducts { .. }
            | E::NonFinite
            | E::Indeterminate => CliError::Numeric(e),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
