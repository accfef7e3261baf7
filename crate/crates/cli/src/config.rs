use std::fs;
use std::path::Path;

use serde::Deserialize;

use pegsearch::agent::AgentConfig;
use pegsearch::environment::{EnvConfig, PegSpec};
use pegsearch::{Error, Result};

use crate::args::{AgentArgs, EnvArgs, PegArg};

/// Optional settings file. Every key is optional; unknown keys are rejected.
///
/// ```toml
/// alpha = 0.001
/// gamma = 0.99
/// tau = 1.0
/// batch_size = 32
/// distance_limit_mm = 4.0
/// r_foundhole = 100.0
/// k_max = 100
/// fz_threshold_n = 20.0
/// dz_threshold_mm = 6.0
/// dxy_mm = 1.0
/// target_sync_episodes = 100
/// buffer_capacity = 10000
/// ```
#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub tau: Option<f64>,
    pub batch_size: Option<usize>,
    pub distance_limit_mm: Option<f64>,
    pub r_foundhole: Option<f64>,
    pub k_max: Option<usize>,
    pub fz_threshold_n: Option<f64>,
    pub dz_threshold_mm: Option<f64>,
    pub dxy_mm: Option<f64>,
    pub target_sync_episodes: Option<usize>,
    pub buffer_capacity: Option<usize>,
    pub noise: Option<bool>,
    pub noise_sigma_force_n: Option<f64>,
    pub noise_sigma_moment_nmm: Option<f64>,
    pub moment_bias_y_nmm: Option<f64>,
    pub step_time_s: Option<f64>,
    pub episodes: Option<usize>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<FileConfig> {
        toml::from_str(text).map_err(|e| Error::config(format!("invalid config file: {e}")))
    }

    pub fn load(path: Option<&Path>) -> Result<FileConfig> {
        match path {
            None => Ok(FileConfig::default()),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                FileConfig::parse(&text)
            }
        }
    }
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

pub fn resolve_env(file: &FileConfig, args: &EnvArgs) -> Result<(EnvConfig, PegSpec)> {
    let d = EnvConfig::default();
    let noise = if args.no_noise { false } else { file.noise.unwrap_or(d.noise) };
    let env = EnvConfig {
        distance_limit_mm: pick(args.distance_limit_mm, file.distance_limit_mm, d.distance_limit_mm),
        r_foundhole: pick(args.r_foundhole, file.r_foundhole, d.r_foundhole),
        k_max: pick(args.k_max, file.k_max, d.k_max),
        fz_threshold_n: pick(args.fz_threshold_n, file.fz_threshold_n, d.fz_threshold_n),
        dz_threshold_mm: pick(args.dz_threshold_mm, file.dz_threshold_mm, d.dz_threshold_mm),
        dxy_mm: pick(args.dxy_mm, file.dxy_mm, d.dxy_mm),
        moment_bias_y_nmm: pick(args.moment_bias_y_nmm, file.moment_bias_y_nmm, d.moment_bias_y_nmm),
        noise_sigma_force_n: file.noise_sigma_force_n.unwrap_or(d.noise_sigma_force_n),
        noise_sigma_moment_nmm: file.noise_sigma_moment_nmm.unwrap_or(d.noise_sigma_moment_nmm),
        step_time_s: file.step_time_s.unwrap_or(d.step_time_s),
        noise,
        ..d
    };
    env.validate()?;
    let peg = match args.peg {
        Some(PegArg::Pin) => PegSpec::pin(),
        Some(PegArg::Wedge) | None => PegSpec::wedge(),
    };
    Ok((env, peg))
}

pub fn resolve_agent(file: &FileConfig, args: &AgentArgs) -> Result<AgentConfig> {
    let d = AgentConfig::default();
    let agent = AgentConfig {
        alpha: pick(args.alpha, file.alpha, d.alpha),
        gamma: pick(args.gamma, file.gamma, d.gamma),
        tau: pick(args.tau, file.tau, d.tau),
        batch_size: pick(args.batch_size, file.batch_size, d.batch_size),
        target_sync_episodes: pick(args.target_sync_episodes, file.target_sync_episodes, d.target_sync_episodes),
        buffer_capacity: pick(args.buffer_capacity, file.buffer_capacity, d.buffer_capacity),
        ..d
    };
    agent.validate()?;
    Ok(agent)
}
