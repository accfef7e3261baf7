//! Deep-Q learning: exploration, replay and the TD update.

mod boltzmann;
mod dqn;
mod replay;

use serde::{Deserialize, Serialize};

use crate::environment::OBS_DIM;
use crate::error::{Error, Result};

pub use boltzmann::{argmax, boltzmann_probabilities, select_action, ActionMode};
pub use dqn::{sync_target, train_step, TrainStats};
pub use replay::ReplayBuffer;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: [f64; OBS_DIM],
    pub action: usize,
    pub reward: f64,
    pub next_state: [f64; OBS_DIM],
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub gamma: f64,
    /// Boltzmann temperature.
    pub tau: f64,
    pub batch_size: usize,
    pub target_sync_episodes: usize,
    pub alpha: f64,
    pub buffer_capacity: usize,
    /// Evaluate the bootstrap with the main network's argmax instead of the
    /// target network's max.
    pub double_dqn: bool,
    /// Environment steps between training updates.
    pub train_every_steps: usize,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            gamma: 0.99,
            tau: 1.0,
            batch_size: 32,
            target_sync_episodes: 100,
            alpha: 0.001,
            buffer_capacity: 10_000,
            double_dqn: false,
            train_every_steps: 1,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::config(format!("gamma must lie in [0, 1], got {}", self.gamma)));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::config(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::config(format!("alpha must be non-negative, got {}", self.alpha)));
        }
        for (name, v) in [
            ("batch_size", self.batch_size),
            ("target_sync_episodes", self.target_sync_episodes),
            ("buffer_capacity", self.buffer_capacity),
            ("train_every_steps", self.train_every_steps),
        ] {
            if v == 0 {
                return Err(Error::config(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }
}
