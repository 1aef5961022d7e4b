use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("query at {requested} exceeds horizon {horizon}")]
    HorizonExceeded { requested: f64, horizon: u64 },

    #[error("insufficient horizon: {0}")]
    InsufficientHorizon(String),

    #[error("truncation {truncation} is below 20·|z| = {required}")]
    TruncationInsufficient { truncation: u64, required: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}
