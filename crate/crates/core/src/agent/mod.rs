//! DQN learner: value network, Adam, replay memory, ε-greedy behaviour, soft
//! target updates and checkpoints.

mod dqn;
mod network;
mod replay;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use dqn::{
    argmax, select_action, td_targets, train_step, DqnAgent, DqnConfig, EpsilonSchedule, RngState,
};
pub use network::{soft_update, Adam, QNetwork};
pub use replay::ReplayBuffer;

use crate::env::{ActionMode, DecisionProcess, StateVariant};
use crate::error::{read_to_string, write_string, Error, Result};
use crate::traffic::{load_intersection, IntersectionSpec};

pub const CHECKPOINT_VERSION: u32 = 1;

/// What the network was trained to control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskDescriptor {
    pub intersection: serde_json::Value,
    pub state_variant: StateVariant,
    pub action_mode: ActionMode,
    pub decision_process: DecisionProcess,
}

impl TaskDescriptor {
    pub fn new(
        spec: &IntersectionSpec,
        state_variant: StateVariant,
        action_mode: ActionMode,
        decision_process: DecisionProcess,
    ) -> Self {
        TaskDescriptor {
            intersection: serde_json::from_str(&spec.to_json()).expect("spec json is valid"),
            state_variant,
            action_mode,
            decision_process,
        }
    }

    pub fn intersection_spec(&self) -> Result<IntersectionSpec> {
        load_intersection(&self.intersection.to_string())
    }
}

/// Versioned structured-text snapshot of a learner. Floats round-trip exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub version: u32,
    pub architecture: Vec<usize>,
    pub params: Vec<f64>,
    pub target_params: Vec<f64>,
    pub optimizer: Adam,
    pub config: DqnConfig,
    pub epsilon_decay_steps: u64,
    pub rng: RngState,
    pub env_steps: u64,
    pub updates: u64,
    #[serde(default)]
    pub task: Option<TaskDescriptor>,
}

impl Checkpoint {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ckpt: Checkpoint = serde_json::from_str(text)?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {}",
                ckpt.version
            )));
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_json())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read_to_string(path)?)
    }

    pub fn network(&self) -> Result<QNetwork> {
        QNetwork::from_params(&self.architecture, self.params.clone())
    }

    pub fn task(&self) -> Result<&TaskDescriptor> {
        self.task
            .as_ref()
            .ok_or_else(|| Error::Checkpoint("checkpoint carries no task descriptor".into()))
    }
}
