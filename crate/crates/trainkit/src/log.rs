use serde::{Deserialize, Serialize};

use crate::schedule::Phase;

/// One line of the training log. Probe fields are filled on the last record
/// of each phase; snapshot records carry the hash of the freshly generated
/// preference pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub phase: Phase,
    pub round: usize,
    pub epoch: usize,
    pub loss: Option<f64>,
    pub ir_probe: Option<f64>,
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs_sha256: Option<String>,
}

impl LogRecord {
    pub fn epoch(phase: Phase, round: usize, epoch: usize, loss: Option<f64>) -> Self {
        Self { phase, round, epoch, loss, ir_probe: None, margin: None, pairs: None, pairs_sha256: None }
    }
}
