use thiserror::Error;

#[derive(Debug, Error)]
pub enum PrefError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("prompt cannot be encoded: {0}")]
    Prompt(String),
    #[error("reference for prompt {index} does not render: {reason}")]
    BadReference { index: usize, reason: String },
    #[error("{0} candidates given, at least 2 are needed")]
    TooFewCandidates(usize),
    #[error(transparent)]
    Lvm(#[from] LvmError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LvmError {
    #[error("transport failure: {0}")]
    TransportError(String),
    #[error("rate limited by the scoring endpoint")]
    RateLimited,
    #[error("no score found in reply: {0:?}")]
    UnparseableScore(String),
    #[error("environment variable {0} is not set")]
    MissingCredential(&'static str),
}
