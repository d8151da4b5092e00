use thiserror::Error;

use crate::log::LogRecord;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("vocabulary: {0}")]
    Vocabulary(String),
    #[error("unknown word {0:?}")]
    UnknownWord(String),
    #[error("sequence of {len} tokens exceeds the context of {context}")]
    ContextOverflow { len: usize, context: usize },
    #[error("scheduling violation: {0}")]
    SchedulingViolation(String),
    #[error("collapse in round {round}: probe IR {ir:.1}% exceeds {limit}%")]
    Collapse { round: usize, ir: f64, limit: f64, log: Vec<LogRecord> },
    #[error("config: {0}")]
    Config(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("empty training data")]
    EmptyData,
    #[error(transparent)]
    Pairs(#[from] prefgen::PrefError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
