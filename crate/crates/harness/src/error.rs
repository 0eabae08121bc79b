use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot parse {what}: {reason}")]
    Parse { what: String, reason: String },
    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },
    #[error("column `{column}` is not numeric (row {row})")]
    NonNumericColumn { column: String, row: usize },
    #[error("simulation failed: {0}")]
    Simulation(fedband::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for configuration and input errors, 3 for simulation failures, 4
    /// for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse { .. } | Self::Validation { .. } | Self::NonNumericColumn { .. } => 2,
            Self::Simulation(_) => 3,
            Self::Io { .. } => 4,
        }
    }
}

impl From<fedband::Error> for HarnessError {
    fn from(e: fedband::Error) -> Self {
        match e {
            fedband::Error::InvalidConfig { field, reason } => Self::Validation {
                field: field.to_string(),
                reason,
            },
            other => Self::Simulation(other),
        }
    }
}
