use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("index overflow: {0} does not fit a 64-bit index")]
    IndexOverflow(String),
    #[error("invalid budget: {0}")]
    InvalidBudget(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("contract abort: {0}")]
    ContractAbort(String),
    #[error("replay mismatch at {location}: {detail}")]
    ReplayMismatch { location: String, detail: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
