use thiserror::Error;

use crate::model::CurveKind;

/// Errors raised while reading, writing, or decoding sequences.
///
/// Each variant has a stable [`code`](SemError::code) that is reused as the
/// issue code in validation reports.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemError {
    #[error("unknown token {token:?} at index {index}")]
    UnknownToken { index: usize, token: String },

    #[error("sequence ended early: expected {expected}")]
    TruncatedSequence { expected: &'static str },

    #[error("unexpected token {found:?} at index {index}: expected {expected}")]
    UnexpectedToken { index: usize, found: String, expected: &'static str },

    #[error("{kind:?} at index {index} has {found} coordinates, expected {expected}")]
    BadArity { index: usize, kind: CurveKind, expected: usize, found: usize },

    #[error("extrusion record at index {index} has {found} fields, expected 18")]
    BadExtrusionRecord { index: usize, found: usize },

    #[error("empty loop at index {index}")]
    EmptyLoop { index: usize },

    #[error("empty face at index {index}")]
    EmptyFace { index: usize },

    #[error("empty sketch at index {index}")]
    EmptySketch { index: usize },

    #[error("loop ending at index {index} mixes a circle with other curves")]
    MixedCircleLoop { index: usize },

    #[error("model invariant violated: {0}")]
    InvariantViolation(String),

    #[error("command {command} at position {position} needs {needed} xy positions, {remaining} remain")]
    SkipOverrun { position: usize, command: i64, needed: usize, remaining: usize },

    #[error("unknown command value {value} at position {position}")]
    UnknownCommand { position: usize, value: i64 },

    #[error("unknown extrusion operation id {value} in record {record}")]
    UnknownOperation { record: usize, value: i64 },

    #[error("value {value} at {location} is outside the grid after unpadding")]
    ValueOutOfRange { location: String, value: i64 },

    #[error("{sketches} sketches but {records} extrusion records")]
    PairCountMismatch { sketches: usize, records: usize },

    #[error("{remaining} xy positions left unconsumed")]
    TrailingPositions { remaining: usize },
}

impl SemError {
    pub fn code(&self) -> &'static str {
        match self {
            SemError::UnknownToken { .. } => "UNKNOWN_TOKEN",
            SemError::TruncatedSequence { .. } => "TRUNCATED_SEQUENCE",
            SemError::UnexpectedToken { .. } => "UNEXPECTED_TOKEN",
            SemError::BadArity { .. } => "BAD_ARITY",
            SemError::BadExtrusionRecord { .. } => "BAD_EXTRUSION_RECORD",
            SemError::EmptyLoop { .. } => "EMPTY_LOOP",
            SemError::EmptyFace { .. } => "EMPTY_FACE",
            SemError::EmptySketch { .. } => "EMPTY_SKETCH",
            SemError::MixedCircleLoop { .. } => "MIXED_CIRCLE_LOOP",
            SemError::InvariantViolation(_) => "INVARIANT_VIOLATION",
            SemError::SkipOverrun { .. } => "SKIP_OVERRUN",
            SemError::UnknownCommand { .. } => "UNKNOWN_COMMAND",
            SemError::UnknownOperation { .. } => "UNKNOWN_OPERATION",
            SemError::ValueOutOfRange { .. } => "VALUE_OUT_OF_RANGE",
            SemError::PairCountMismatch { .. } => "PAIR_COUNT_MISMATCH",
            SemError::TrailingPositions { .. } => "TRAILING_POSITIONS",
        }
    }

    /// Token index the error points at, if any.
    pub fn index(&self) -> Option<usize> {
        match *self {
            SemError::UnknownToken { index, .. }
            | SemError::UnexpectedToken { index, .. }
            | SemError::BadArity { index, .. }
            | SemError::BadExtrusionRecord { index, .. }
            | SemError::EmptyLoop { index }
            | SemError::EmptyFace { index }
            | SemError::EmptySketch { index }
            | SemError::MixedCircleLoop { index } => Some(index),
            _ => None,
        }
    }
}
