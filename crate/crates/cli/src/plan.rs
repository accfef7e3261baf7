use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use pegsearch::environment::{make_wall, EnvConfig, GeometryRanges, PegSpec, StateVariant, WallModel};
use pegsearch::harness::{
    curve_csv, episodes_csv, evaluate, evaluate_random_inits, moving_average, run_baseline, saliency_report,
    traces_csv, train, Baseline, EvalOutput, EvalSettings, RandomInitGrid, TrainConfig, MOVING_AVERAGE_WINDOW,
};
use pegsearch::neuralnet::Checkpoint;
use pegsearch::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CHECKPOINT_FILE: &str = "model.ckpt";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenWallPlan {
    pub holes: usize,
    pub seed: u64,
    pub geometry: GeometryRanges,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainPlan {
    pub wall: PathBuf,
    pub train: TrainConfig,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuitePlan {
    pub wall: PathBuf,
    pub holes: Vec<usize>,
    pub init_positions: Vec<usize>,
    pub per_cell: usize,
    pub seed: u64,
    pub traces: usize,
    pub env: EnvConfig,
    pub peg: PegSpec,
    pub out: PathBuf,
}

impl SuitePlan {
    fn settings(&self) -> EvalSettings {
        EvalSettings {
            env: self.env.clone(),
            peg: self.peg.clone(),
            seed: self.seed,
            episodes_per_cell: self.per_cell,
            trace_episodes: self.traces,
            ..EvalSettings::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalPlan {
    pub model: PathBuf,
    pub variant: Option<StateVariant>,
    pub random_inits: Option<RandomInitGrid>,
    pub suite: SuitePlan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselinePlan {
    pub method: Baseline,
    pub suite: SuitePlan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaliencyPlan {
    pub model: PathBuf,
    pub wall: PathBuf,
    pub holes: Vec<usize>,
    pub init_positions: Vec<usize>,
    pub episodes: usize,
    pub seed: u64,
    pub env: EnvConfig,
    pub peg: PegSpec,
    pub out: PathBuf,
}

/// A fully resolved command: everything needed to reproduce its artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "config", rename_all = "kebab-case")]
pub enum Plan {
    GenWall(GenWallPlan),
    Train(TrainPlan),
    Eval(EvalPlan),
    Baseline(BaselinePlan),
    Saliency(SaliencyPlan),
}

/// Written before a run starts. Contains no timestamps, so a replay
/// reproduces it byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub artifacts: Vec<PathBuf>,
    pub config: serde_json::Value,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<RunManifest> {
        serde_json::from_str(text).map_err(|source| Error::Json { what: "run manifest", source })
    }

    pub fn load(path: &Path) -> Result<RunManifest> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunManifest::from_json(&text)
    }

    pub fn plan(&self) -> Result<Plan> {
        let tagged = serde_json::json!({ "command": self.command, "config": self.config });
        serde_json::from_value(tagged).map_err(|source| Error::Json { what: "run manifest config", source })
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_eval(out: &Path, eval: &EvalOutput, traces: usize) -> Result<String> {
    let table = eval.report.to_table();
    write(&out.join("report.txt"), &table)?;
    write(&out.join("report.csv"), eval.report.to_csv())?;
    if traces > 0 {
        write(&out.join("traces.csv"), traces_csv(&eval.traces))?;
    }
    Ok(table)
}

impl Plan {
    pub fn command(&self) -> &'static str {
        match self {
            Plan::GenWall(_) => "gen-wall",
            Plan::Train(_) => "train",
            Plan::Eval(_) => "eval",
            Plan::Baseline(_) => "baseline",
            Plan::Saliency(_) => "saliency",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Plan::GenWall(p) => p.seed,
            Plan::Train(p) => p.train.seed,
            Plan::Eval(p) => p.suite.seed,
            Plan::Baseline(p) => p.suite.seed,
            Plan::Saliency(p) => p.seed,
        }
    }

    /// Output file for `gen-wall`, output directory otherwise.
    pub fn out(&self) -> &Path {
        match self {
            Plan::GenWall(p) => &p.out,
            Plan::Train(p) => &p.out,
            Plan::Eval(p) => &p.suite.out,
            Plan::Baseline(p) => &p.suite.out,
            Plan::Saliency(p) => &p.out,
        }
    }

    pub fn set_out(&mut self, out: PathBuf) {
        match self {
            Plan::GenWall(p) => p.out = out,
            Plan::Train(p) => p.out = out,
            Plan::Eval(p) => p.suite.out = out,
            Plan::Baseline(p) => p.suite.out = out,
            Plan::Saliency(p) => p.out = out,
        }
    }

    pub fn manifest_path(&self) -> PathBuf {
        match self {
            Plan::GenWall(p) => {
                let mut name = p.out.clone().into_os_string();
                name.push(".manifest.json");
                PathBuf::from(name)
            }
            _ => self.out().join(MANIFEST_FILE),
        }
    }

    pub fn artifacts(&self) -> Vec<PathBuf> {
        let dir = self.out();
        let names: Vec<&str> = match self {
            Plan::GenWall(p) => return vec![p.out.clone()],
            Plan::Train(_) => vec![CHECKPOINT_FILE, "episodes.csv", "curve.csv"],
            Plan::Eval(EvalPlan { suite, .. }) | Plan::Baseline(BaselinePlan { suite, .. }) => {
                let mut v = vec!["report.txt", "report.csv"];
                if suite.traces > 0 {
                    v.push("traces.csv");
                }
                v
            }
            Plan::Saliency(_) => vec!["saliency.csv", "saliency.txt"],
        };
        names.into_iter().map(|n| dir.join(n)).collect()
    }

    pub fn manifest(&self) -> RunManifest {
        let tagged = serde_json::to_value(self).expect("plan serializes");
        RunManifest {
            tool: "pegsearch".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.command().into(),
            seed: self.seed(),
            artifacts: self.artifacts(),
            config: tagged["config"].clone(),
        }
    }

    /// Writes the manifest, then runs. Returns a human-readable summary.
    pub fn execute(&self) -> Result<String> {
        if !matches!(self, Plan::GenWall(_)) {
            ensure_dir(self.out())?;
        }
        write(&self.manifest_path(), self.manifest().to_json())?;
        self.run()
    }

    fn run(&self) -> Result<String> {
        match self {
            Plan::GenWall(p) => {
                let wall = make_wall(p.holes, p.seed, &p.geometry)?;
                wall.save(&p.out)?;
                Ok(format!("wrote {} holes to {}\n", wall.holes.len(), p.out.display()))
            }
            Plan::Train(p) => {
                let wall = WallModel::load(&p.wall)?;
                let result = train(&wall, &p.train)?;
                result.checkpoint.save(&p.out.join(CHECKPOINT_FILE))?;
                write(&p.out.join("episodes.csv"), episodes_csv(&result.records))?;
                write(&p.out.join("curve.csv"), curve_csv(&result.records))?;
                let rewards: Vec<f64> = result.records.iter().map(|r| r.total_reward).collect();
                let last_ma = moving_average(&rewards, MOVING_AVERAGE_WINDOW).last().copied().unwrap_or(0.0);
                let found = result.records.iter().filter(|r| r.success).count();
                Ok(format!(
                    "trained {} episodes ({}): found {}/{}, final reward MA{} {:.1}\n",
                    result.records.len(),
                    p.train.variant,
                    found,
                    result.records.len(),
                    MOVING_AVERAGE_WINDOW,
                    last_ma
                ))
            }
            Plan::Eval(p) => {
                let s = &p.suite;
                let wall = WallModel::load(&s.wall)?;
                let ck = Checkpoint::load(&p.model)?;
                let variant = p.variant.unwrap_or(ck.meta.variant);
                let eval = match &p.random_inits {
                    Some(grid) => evaluate_random_inits(&ck, &wall, &s.holes, grid, variant, &s.settings())?,
                    None => evaluate(&ck, &wall, &s.holes, &s.init_positions, variant, &s.settings())?,
                };
                write_eval(&s.out, &eval, s.traces)
            }
            Plan::Baseline(p) => {
                let s = &p.suite;
                let wall = WallModel::load(&s.wall)?;
                let eval = run_baseline(p.method, &wall, &s.holes, &s.init_positions, &s.settings())?;
                write_eval(&s.out, &eval, s.traces)
            }
            Plan::Saliency(p) => {
                let wall = WallModel::load(&p.wall)?;
                let ck = Checkpoint::load(&p.model)?;
                let settings = EvalSettings {
                    env: p.env.clone(),
                    peg: p.peg.clone(),
                    seed: p.seed,
                    episodes_per_cell: p.episodes,
                    ..EvalSettings::default()
                };
                let report = saliency_report(&ck, &wall, &p.holes, &p.init_positions, &settings)?;
                let table = report.to_table();
                write(&p.out.join("saliency.csv"), report.to_csv())?;
                write(&p.out.join("saliency.txt"), &table)?;
                Ok(table)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips_to_the_same_plan() {
        let plan = Plan::Train(TrainPlan {
            wall: "wall.json".into(),
            train: TrainConfig { episodes: 7, seed: 3, ..TrainConfig::default() },
            out: "runs/a".into(),
        });
        let m = plan.manifest();
        assert_eq!(m.command, "train");
        assert_eq!(m.seed, 3);
        assert_eq!(m.artifacts[0], Path::new("runs/a").join(CHECKPOINT_FILE));
        let back = RunManifest::from_json(&m.to_json()).unwrap();
        assert_eq!(back.plan().unwrap(), plan);
        assert_eq!(back.to_json(), m.to_json());
    }

    #[test]
    fn gen_wall_manifest_sits_next_to_the_wall() {
        let plan = Plan::GenWall(GenWallPlan {
            holes: 3,
            seed: 1,
            geometry: GeometryRanges::default(),
            out: "w/wall.json".into(),
        });
        assert_eq!(plan.manifest_path(), PathBuf::from("w/wall.json.manifest.json"));
    }
}
