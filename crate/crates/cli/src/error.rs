use std::path::Path;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Infeasible(String),

    #[error("{0}")]
    Internal(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 2 usage, 3 infeasible design, 4 internal invariant, 1 I/O.
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Internal(_) => 4,
            CliError::Io { .. } => 1,
        })
    }
}

impl From<mcvd::Error> for CliError {
    fn from(e: mcvd::Error) -> Self {
        match e {
            mcvd::Error::InvalidParameter { .. } | mcvd::Error::Domain(_) => CliError::Usage(e.to_string()),
            mcvd::Error::Unattainable { .. } => CliError::Infeasible(e.to_string()),
            mcvd::Error::Overflow(_) | mcvd::Error::Invariant(_) => CliError::Internal(e.to_string()),
        }
    }
}
