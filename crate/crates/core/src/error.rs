use thiserror::Error;

/// Errors raised by the transform library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid integer partition: {0}")]
    InvalidPartition(String),

    #[error("invalid ordered set partition: {0}")]
    InvalidSetPartition(String),

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("n = {n} exceeds the supported maximum of {max}")]
    TooLarge { n: usize, max: usize },

    #[error("spectrum for dominating shape {0} is missing")]
    MissingSpectrum(String),

    #[error("shape {0} is not available")]
    UnknownShape(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("cache: {0}")]
    Cache(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by malformed input rather than the environment.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidPermutation(_)
                | Error::InvalidPartition(_)
                | Error::InvalidSetPartition(_)
                | Error::SizeMismatch { .. }
                | Error::UnknownShape(_)
                | Error::Parse { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
