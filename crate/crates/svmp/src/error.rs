//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("labels must contain at least one +1 and one -1")]
    SingleClass,

    #[error("bag of {n} rows exceeds the enumeration cap of {cap}; use the alternating or parameter-tuning solver")]
    EnumerationCap { n: usize, cap: usize },

    #[error("negative feature at row {row}, column {col}: homogeneous kernel maps require nonnegative inputs")]
    NegativeFeature { row: usize, col: usize },

    #[error("degenerate margin: point {index} is within {kink_tol:e} of the hinge kink; the Jacobian is undefined there")]
    DegenerateMargin { index: usize, kink_tol: f64 },

    #[error("bad magic at byte offset 0: expected \"SVMP\", found {found:?}")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported format version {version} at byte offset 4")]
    UnsupportedVersion { version: u32 },

    #[error("truncated payload at byte offset {offset}: expected {expected} bytes, found {actual}")]
    TruncatedPayload {
        offset: u64,
        expected: u64,
        actual: u64,
    },

    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("all {0} bags failed to pool")]
    AllBagsFailed(usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
