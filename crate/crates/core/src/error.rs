use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition (shape, range, ids).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Input is well formed but the statistic is undefined for it
    /// (zero variance, zero within-group scatter, rank-0 configuration...).
    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    #[error("wav decoding failed: {0}")]
    Wav(#[from] hound::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, Error::Degenerate(_))
    }
}
