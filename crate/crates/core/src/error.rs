use thiserror::Error;

pub type Result<T> = std::result::Result<T, TomoError>;

#[derive(Debug, Error)]
pub enum TomoError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// All Cholesky parameters are zero, so `T†T / Tr(T†T)` is undefined.
    #[error("degenerate Cholesky parameters (all zero)")]
    DegenerateParameters,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error at line {line}: {message}")]
    Csv { line: u64, message: String },
}

impl TomoError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        TomoError::InvalidInput(msg.into())
    }
}
