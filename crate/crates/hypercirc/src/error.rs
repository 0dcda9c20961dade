use std::path::PathBuf;

use hypercirc_core::Error as CoreError;

/// Process exit status for a failure that is the data's fault.
pub const EXIT_DATA: i32 = 2;
/// Process exit status for a degenerate sample or fit.
pub const EXIT_DEGENERATE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{input}: line {line}: {message}")]
    Parse {
        input: String,
        line: u64,
        message: String,
    },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("result grids differ: {0}")]
    GridMismatch(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(CoreError::Degenerate { .. } | CoreError::ZeroVariance) => EXIT_DEGENERATE,
            _ => EXIT_DATA,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
