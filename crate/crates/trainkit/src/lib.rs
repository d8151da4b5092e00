//! Toy text-to-sequence policy trained with alternating supervised and
//! preference phases.
//!
//! A small decoder-only transformer reads `<bos> prompt <sep>` and writes a
//! CAD token sequence. Supervised phases minimize cross-entropy on the
//! sequence tokens; preference phases apply a DPO objective against a frozen
//! snapshot taken at the end of the preceding supervised phase.

pub mod checkpoint;
pub mod config;
mod error;
pub mod log;
pub mod loss;
pub mod model;
pub mod optim;
pub mod schedule;
pub mod synth;
pub mod train;
pub mod vocab;

pub use config::{ModelShape, TrainConfig};
pub use error::TrainError;
pub use log::LogRecord;
pub use loss::{dpo_loss, dpo_objective, mean_margin, seq_logprob, sl_loss, Example, LossGrad, TokenPair};
pub use model::{ModelConfig, PolicyModel};
pub use schedule::{snapshot_reference, Phase, ReferenceModel, Scheduler};
pub use train::{train_alternating, CheckpointInfo, Decoder, Probe, TrainOutcome, Trainer};
pub use vocab::Vocabulary;
