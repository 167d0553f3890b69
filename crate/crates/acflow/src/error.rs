use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("config key `{key}` (line {line}): {message}")]
    Key {
        key: String,
        line: usize,
        message: String,
    },
    #[error("config: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("snapshot {path}: {message}")]
    Snapshot { path: PathBuf, message: String },
    #[error("numerical abort: {0}")]
    Numerical(acflow_core::Error),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error: 2 for configuration problems, 3
    /// for numerical aborts and file-system failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Parse { .. } | HarnessError::Key { .. } | HarnessError::Invalid(_) => 2,
            HarnessError::Numerical(acflow_core::Error::InvalidConfig(_)) => 2,
            _ => 3,
        }
    }
}

impl From<acflow_core::Error> for HarnessError {
    fn from(e: acflow_core::Error) -> Self {
        match e {
            acflow_core::Error::InvalidConfig(msg) => HarnessError::Invalid(msg.to_string()),
            other => HarnessError::Numerical(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
