use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::TrainError;
use crate::model::PolicyModel;

/// Frozen copy of a policy. There is no mutable access to the wrapped model.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceModel(Arc<PolicyModel>);

impl ReferenceModel {
    pub fn model(&self) -> &PolicyModel {
        &self.0
    }

    pub fn snapshot(&self) -> ReferenceModel {
        ReferenceModel(Arc::new((*self.0).clone()))
    }
}

/// Deep copy of the policy. Prefer [`Scheduler::snapshot`] during training,
/// which also checks that the call falls on an SL boundary.
pub fn snapshot_reference(policy: &PolicyModel) -> ReferenceModel {
    ReferenceModel(Arc::new(policy.clone()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "SL")]
    Sl,
    #[serde(rename = "SNAP")]
    Snapshot,
    #[serde(rename = "VF")]
    Vf,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Sl => "SL",
            Phase::Snapshot => "SNAP",
            Phase::Vf => "VF",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Fresh,
    InSl,
    SlDone,
    Snapped,
    InVf,
    VfDone,
}

/// Enforces the phase order SL, then repeated SNAP → VF → SL blocks.
#[derive(Clone, Debug)]
pub struct Scheduler {
    state: State,
    log: Vec<Phase>,
}

impl Default for Scheduler {
    fn default() -> Self {
        Self::new()
    }
}

impl Scheduler {
    pub fn new() -> Self {
        Self { state: State::Fresh, log: Vec::new() }
    }

    pub fn phases(&self) -> &[Phase] {
        &self.log
    }

    fn violation(&self, what: &str) -> TrainError {
        TrainError::SchedulingViolation(format!("{what} not allowed in state {:?}", self.state))
    }

    pub fn begin_sl(&mut self) -> Result<(), TrainError> {
        match self.state {
            State::Fresh | State::VfDone => {
                self.state = State::InSl;
                self.log.push(Phase::Sl);
                Ok(())
            }
            _ => Err(self.violation("starting SL")),
        }
    }

    pub fn end_sl(&mut self) -> Result<(), TrainError> {
        match self.state {
            State::InSl => {
                self.state = State::SlDone;
                Ok(())
            }
            _ => Err(self.violation("ending SL")),
        }
    }

    /// Freezes the policy. Only allowed right after an SL phase.
    pub fn snapshot(&mut self, policy: &PolicyModel) -> Result<ReferenceModel, TrainError> {
        match self.state {
            State::SlDone => {
                self.state = State::Snapped;
                self.log.push(Phase::Snapshot);
                Ok(snapshot_reference(policy))
            }
            _ => Err(self.violation("snapshot")),
        }
    }

    pub fn begin_vf(&mut self) -> Result<(), TrainError> {
        match self.state {
            State::Snapped => {
                self.state = State::InVf;
                self.log.push(Phase::Vf);
                Ok(())
            }
            _ => Err(self.violation("starting VF")),
        }
    }

    pub fn end_vf(&mut self) -> Result<(), TrainError> {
        match self.state {
            State::InVf => {
                self.state = State::VfDone;
                Ok(())
            }
            _ => Err(self.violation("ending VF")),
        }
    }
}
