use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("column `{0}` is not declared in the column specification")]
    UnknownColumn(String),

    #[error("column `{0}` is declared but missing from the header")]
    MissingColumn(String),

    #[error("invalid column specification: {0}")]
    InvalidSpec(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("bad IDX magic number {found:#010x}, expected {expected:#010x}")]
    BadMagic { expected: u32, found: u32 },

    #[error("truncated IDX data: {0}")]
    Truncated(String),

    #[error("operation does not apply to this task: {0}")]
    WrongTask(String),

    #[error("schedule needs {needed} pool points but only {available} are available")]
    PoolExhausted { needed: usize, available: usize },

    #[error("learning curves do not share a train-size schedule")]
    MismatchedSchedules,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by a bad parameter or schedule rather than by
    /// the contents of an input file.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_) | Error::PoolExhausted { .. } | Error::WrongTask(_)
        )
    }
}
