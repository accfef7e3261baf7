//! Training and evaluation protocols and their reports.

mod eval;
mod report;
mod saliency;
mod train;

use serde::{Deserialize, Serialize};

use crate::agent::AgentConfig;
use crate::environment::{EnvConfig, PegSpec, StateVariant};
use crate::error::{Error, Result};

pub use eval::{
    evaluate, evaluate_random_inits, random_init_grid, run_baseline, run_episode, Baseline,
    CellReport, EvalOutput, EvalReport, EvalSettings, EpisodeSummary, RandomInitGrid, TraceRow,
    DEFAULT_SPIRAL_RINGS,
};
pub use report::{curve_csv, episodes_csv, traces_csv, EPISODE_CSV_HEADER};
pub use saliency::{saliency_report, SaliencyReport, SaliencyRow};
pub use train::{train, TrainOutput};

/// Window of the moving averages in training curves.
pub const MOVING_AVERAGE_WINDOW: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub episodes: usize,
    pub hole_id: usize,
    /// Named initial positions drawn uniformly at the start of each episode.
    pub init_positions: Vec<usize>,
    pub variant: StateVariant,
    pub seed: u64,
    pub agent: AgentConfig,
    pub env: EnvConfig,
    pub peg: PegSpec,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            episodes: 500,
            hole_id: 1,
            init_positions: (2..=8).collect(),
            variant: StateVariant::S1,
            seed: 1,
            agent: AgentConfig::default(),
            env: EnvConfig::default(),
            peg: PegSpec::wedge(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.init_positions.is_empty() {
            return Err(Error::config("training needs at least one initial position"));
        }
        for &p in &self.init_positions {
            crate::environment::init_position(p)?;
        }
        self.agent.validate()?;
        self.env.validate()?;
        self.peg.validate()
    }
}

/// One row of the episode log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    /// 1-based.
    pub episode: usize,
    pub steps: usize,
    pub total_reward: f64,
    pub success: bool,
    pub final_distance_mm: f64,
    pub sim_time_s: f64,
    pub init_pos: usize,
    pub hole_id: usize,
}

/// Trailing moving average; the first `window - 1` entries average what is
/// available.
pub fn moving_average(xs: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(xs.len());
    let mut sum = 0.0;
    for i in 0..xs.len() {
        sum += xs[i];
        if i >= window {
            sum -= xs[i - window];
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}

/// Parses `"2-13"`, `"1,3,5"` or mixes like `"1,4-6"`.
pub fn parse_id_list(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || Error::config(format!("invalid id list entry {part:?}"));
        match part.split_once('-') {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(Error::config(format!("empty id list {text:?}")));
    }
    Ok(out)
}
