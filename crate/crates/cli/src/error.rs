use std::path::PathBuf;

use hebb_dual::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {msg}", path.display())]
    Malformed { path: PathBuf, msg: String },
    #[error("{0}")]
    Internal(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for bad flags or data that does not fit the request, 1 for I/O and
    /// run failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Malformed { .. } | CliError::Internal(_) => 1,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

fn core_exit_code(e: &CoreError) -> u8 {
    match e {
        CoreError::InvalidLabel { .. }
        | CoreError::Domain { .. }
        | CoreError::DimensionMismatch { .. }
        | CoreError::InvalidParameter { .. }
        | CoreError::Dataset(_) => 2,
        CoreError::Training { source, .. } => core_exit_code(source),
        _ => 1,
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
