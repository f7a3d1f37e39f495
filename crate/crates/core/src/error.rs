use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field has {got} samples, grid expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("field sample at index {index} is not finite")]
    NonFinite { index: usize },

    #[error("fields are defined on different grids")]
    GridMismatch,

    #[error("unsupported image format: magic {0:?}")]
    UnsupportedFormat(String),

    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),

    #[error("truncated PGM payload: expected {expected} samples, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("sample {value} at pixel {index} exceeds max value {max_value}")]
    SampleOutOfRange {
        index: usize,
        value: u32,
        max_value: u32,
    },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
