use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Deep-Q hole search for peg-in-hole insertion on a simulated concrete wall.
///
/// Settings resolve as: command-line flags, then the `--config` TOML file,
/// then built-in defaults.
#[derive(Debug, Parser)]
#[command(name = "pegsearch", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a wall of holes with randomized chamfers.
    GenWall(GenWallArgs),
    /// Train a Q-network on one hole.
    Train(TrainArgs),
    /// Evaluate a checkpoint with the greedy policy.
    Eval(EvalArgs),
    /// Run the spiral or moment baseline.
    Baseline(BaselineArgs),
    /// Average guided-backprop saliency per input.
    Saliency(SaliencyArgs),
    /// Re-run a recorded manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct GenWallArgs {
    #[arg(long, default_value_t = 13)]
    pub holes: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Smallest chamfer width (mm).
    #[arg(long)]
    pub chamfer_min_mm: Option<f64>,
    /// Largest chamfer width (mm).
    #[arg(long)]
    pub chamfer_max_mm: Option<f64>,
    #[arg(long, default_value = "wall.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PegArg {
    Wedge,
    Pin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateArg {
    S1,
    S2,
}

/// Environment settings shared by every simulation command.
#[derive(Debug, Default, Args)]
pub struct EnvArgs {
    /// TOML settings file; see the README for keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Disable sensor noise and surface roughness.
    #[arg(long)]
    pub no_noise: bool,
    #[arg(long, value_enum)]
    pub peg: Option<PegArg>,
    /// Boundary radius D (mm).
    #[arg(long)]
    pub distance_limit_mm: Option<f64>,
    #[arg(long)]
    pub r_foundhole: Option<f64>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub fz_threshold_n: Option<f64>,
    #[arg(long)]
    pub dz_threshold_mm: Option<f64>,
    #[arg(long)]
    pub dxy_mm: Option<f64>,
    #[arg(long)]
    pub moment_bias_y_nmm: Option<f64>,
}

/// Learning settings, training only.
#[derive(Debug, Default, Args)]
pub struct AgentArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub target_sync_episodes: Option<usize>,
    #[arg(long)]
    pub buffer_capacity: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub wall: PathBuf,
    #[arg(long)]
    pub hole: Option<usize>,
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long, value_enum)]
    pub state: Option<StateArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Training start positions, e.g. `2-8`.
    #[arg(long)]
    pub init_positions: Option<String>,
    #[arg(long, default_value = "run")]
    pub out: PathBuf,
    #[command(flatten)]
    pub env: EnvArgs,
    #[command(flatten)]
    pub agent: AgentArgs,
}

/// Hole, start and episode selection shared by the evaluation commands.
#[derive(Debug, Args)]
pub struct SuiteArgs {
    #[arg(long)]
    pub wall: PathBuf,
    /// Hole ids, e.g. `2-13` or `2,4,6`.
    #[arg(long, default_value = "2-13")]
    pub holes: String,
    /// Start positions, e.g. `1-8`.
    #[arg(long, default_value = "1-8")]
    pub init_positions: String,
    #[arg(long, default_value_t = 10)]
    pub per_cell: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Episodes per cell written to `traces.csv`.
    #[arg(long, default_value_t = 0)]
    pub traces: usize,
    #[arg(long, default_value = "eval")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Required to match the checkpoint's variant when given.
    #[arg(long, value_enum)]
    pub state: Option<StateArg>,
    /// Draw starts from the 2-3 mm square annulus instead of the named
    /// positions; `--per-cell` then counts episodes per hole.
    #[arg(long)]
    pub random_inits: bool,
    #[command(flatten)]
    pub suite: SuiteArgs,
    #[command(flatten)]
    pub env: EnvArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Spiral,
    Moment,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Spiral rings searched.
    #[arg(long)]
    pub rings: Option<u64>,
    /// Displacement rise over the first probe that counts as on-chamfer (mm).
    #[arg(long)]
    pub margin_mm: Option<f64>,
    #[command(flatten)]
    pub suite: SuiteArgs,
    #[command(flatten)]
    pub env: EnvArgs,
}

#[derive(Debug, Args)]
pub struct SaliencyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub wall: PathBuf,
    #[arg(long, default_value = "2-4")]
    pub holes: String,
    #[arg(long, default_value = "1-8")]
    pub init_positions: String,
    /// Episodes per (hole, start).
    #[arg(long, default_value_t = 2)]
    pub episodes: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "saliency")]
    pub out: PathBuf,
    #[command(flatten)]
    pub env: EnvArgs,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write artifacts here instead of the recorded location.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
