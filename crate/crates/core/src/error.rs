use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("column '{0}' is constant and cannot be normalized")]
    ConstantColumn(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("stage order violation: {0}")]
    StageOrder(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("model load error: {0}")]
    Load(String),

    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u64),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
