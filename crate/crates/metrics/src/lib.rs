//! Scores for generated sequences: primitive F1, Chamfer distance, coverage,
//! minimum matching distance, Jensen-Shannon divergence of occupancy and the
//! invalidity ratio.

pub mod chamfer;
mod error;
pub mod f1;
pub mod report;
pub mod set;
pub mod validity;

pub use chamfer::chamfer;
pub use error::MetricsError;
pub use f1::{f1_primitives, F1Breakdown, Prf};
pub use report::{evaluate, EvalConfig, EvalReport};
pub use set::{coverage, jsd, mmd, set_metrics, SetMetrics};
pub use validity::{invalidity_ratio, is_invalid};
