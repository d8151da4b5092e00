use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("{0} set is empty")]
    EmptySet(&'static str),
    #[error("record {index}: generated and reference prompts differ")]
    RecordMismatch { index: usize },
    #[error("{generated} generated records for {reference} references")]
    LengthMismatch { generated: usize, reference: usize },
    #[error("grid size must be positive")]
    InvalidGrid,
}
