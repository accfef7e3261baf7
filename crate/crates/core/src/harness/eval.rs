use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use crate::environment::{
    init_position, Action, ContactResult, EnvConfig, Observation, Outcome, PegSpec, SearchEnv,
    StateVariant, WallModel,
};
use crate::error::{Error, Result};
use crate::neuralnet::Checkpoint;
use crate::parallel::{self, Execution};
use crate::rng::{derive_seed, stream, tag};
use crate::strategies::{DqnPolicy, MomentPolicy, SearchPolicy, SpiralPolicy};

/// Spiral rings searched by the blind baseline: a ±5 mm square.
pub const DEFAULT_SPIRAL_RINGS: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Baseline {
    /// Blind square spiral; no boundary, the search area is the spiral extent.
    Spiral { rings: u64 },
    /// Force on the chamfer, tilt elsewhere; normal boundary rules.
    Moment { margin_mm: f64 },
}

impl Baseline {
    pub fn name(&self) -> &'static str {
        match self {
            Baseline::Spiral { .. } => "spiral",
            Baseline::Moment { .. } => "moment",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalSettings {
    pub env: EnvConfig,
    pub peg: PegSpec,
    pub seed: u64,
    pub episodes_per_cell: usize,
    pub execution: Execution,
    /// Episodes per cell whose probes are kept as trace rows.
    pub trace_episodes: usize,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            env: EnvConfig::default(),
            peg: PegSpec::wedge(),
            seed: 1,
            episodes_per_cell: 10,
            execution: Execution::default(),
            trace_episodes: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeSummary {
    pub steps: usize,
    pub total_reward: f64,
    pub success: bool,
    pub final_distance_mm: f64,
    pub outcome: Outcome,
}

/// One probe of one traced episode.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub hole_id: usize,
    pub init_label: String,
    pub episode: usize,
    pub step: usize,
    pub peg_xy: [f64; 2],
    pub contact: ContactResult,
    /// Action chosen from this probe; `None` on the final probe.
    pub action: Option<Action>,
}

/// Aggregated episodes of one (hole, initial position) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellReport {
    pub hole_id: usize,
    pub init_label: String,
    pub episodes: usize,
    pub successes: usize,
    pub avg_steps: f64,
    pub avg_time_s: f64,
    pub max_time_s: f64,
    pub avg_reward: f64,
    /// Percent.
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub method: String,
    pub variant: Option<StateVariant>,
    pub cells: Vec<CellReport>,
}

#[derive(Debug, Clone)]
pub struct EvalOutput {
    pub report: EvalReport,
    pub traces: Vec<TraceRow>,
}

/// Callback payload: a probe and the decision taken from it.
pub struct ProbeEvent<'a> {
    pub step: usize,
    pub peg_xy: [f64; 2],
    pub contact: &'a ContactResult,
    pub observation: &'a Observation,
    pub action: Option<Action>,
}

/// Plays one episode with `policy`. An initial probe that already inserts
/// counts as found with reward `r_foundhole` and zero steps.
pub fn run_episode(
    env: &mut SearchEnv,
    policy: &mut dyn SearchPolicy,
    hole_id: usize,
    init_xy: [f64; 2],
    variant: StateVariant,
    on_probe: &mut dyn FnMut(&ProbeEvent<'_>),
) -> Result<EpisodeSummary> {
    let mut obs = env.reset(hole_id, init_xy, variant)?;
    let mut contact = *env.last_contact().expect("reset probes");
    policy.begin(&contact, &obs);
    let r_found = env.config().r_foundhole;
    let mut total = 0.0;
    if env.state().expect("reset").done {
        total = r_found;
    }
    loop {
        let st = env.state().expect("reset");
        let (step, peg_xy, done) = (st.step_count, st.peg_xy, st.done);
        if done {
            on_probe(&ProbeEvent {
                step,
                peg_xy,
                contact: &contact,
                observation: &obs,
                action: None,
            });
            break;
        }
        let action = policy.next_action(&contact, &obs)?;
        on_probe(&ProbeEvent {
            step,
            peg_xy,
            contact: &contact,
            observation: &obs,
            action: Some(action),
        });
        let r = env.step(action)?;
        total += r.reward;
        obs = r.observation;
        contact = r.contact;
    }
    let st = env.state().expect("reset");
    Ok(EpisodeSummary {
        steps: st.step_count,
        total_reward: total,
        success: st.outcome == Outcome::Found,
        final_distance_mm: st.peg_xy[0].hypot(st.peg_xy[1]),
        outcome: st.outcome,
    })
}

impl CellReport {
    pub fn from_episodes(
        hole_id: usize,
        init_label: String,
        episodes: &[EpisodeSummary],
        step_time_s: f64,
    ) -> CellReport {
        let n = episodes.len();
        let nf = n.max(1) as f64;
        let successes = episodes.iter().filter(|e| e.success).count();
        let steps: usize = episodes.iter().map(|e| e.steps).sum();
        let max_steps = episodes.iter().map(|e| e.steps).max().unwrap_or(0);
        CellReport {
            hole_id,
            init_label,
            episodes: n,
            successes,
            avg_steps: steps as f64 / nf,
            avg_time_s: steps as f64 * step_time_s / nf,
            max_time_s: max_steps as f64 * step_time_s,
            avg_reward: episodes.iter().map(|e| e.total_reward).sum::<f64>() / nf,
            success_rate: 100.0 * successes as f64 / nf,
        }
    }

    /// Episode-weighted merge.
    pub fn merge(hole_id: usize, init_label: String, cells: &[&CellReport]) -> CellReport {
        let n: usize = cells.iter().map(|c| c.episodes).sum();
        let nf = n.max(1) as f64;
        let w = |f: fn(&CellReport) -> f64| cells.iter().map(|c| f(c) * c.episodes as f64).sum::<f64>() / nf;
        let successes = cells.iter().map(|c| c.successes).sum();
        CellReport {
            hole_id,
            init_label,
            episodes: n,
            successes,
            avg_steps: w(|c| c.avg_steps),
            avg_time_s: w(|c| c.avg_time_s),
            max_time_s: cells.iter().map(|c| c.max_time_s).fold(0.0, f64::max),
            avg_reward: w(|c| c.avg_reward),
            success_rate: 100.0 * successes as f64 / nf,
        }
    }
}

impl EvalReport {
    /// All cells merged, or `None` for an empty report.
    pub fn aggregate(&self) -> Option<CellReport> {
        if self.cells.is_empty() {
            return None;
        }
        let refs: Vec<&CellReport> = self.cells.iter().collect();
        Some(CellReport::merge(0, "all".into(), &refs))
    }

    /// One merged row per hole, in first-seen order.
    pub fn per_hole(&self) -> Vec<CellReport> {
        let mut ids: Vec<usize> = Vec::new();
        for c in &self.cells {
            if !ids.contains(&c.hole_id) {
                ids.push(c.hole_id);
            }
        }
        ids.into_iter()
            .map(|id| {
                let refs: Vec<&CellReport> = self.cells.iter().filter(|c| c.hole_id == id).collect();
                CellReport::merge(id, "all".into(), &refs)
            })
            .collect()
    }
}

struct CellSpec {
    hole_id: usize,
    label: String,
    key: u64,
    starts: Vec<[f64; 2]>,
}

fn run_cells<'p, F>(
    wall: &WallModel,
    env_cfg: &EnvConfig,
    settings: &EvalSettings,
    variant: StateVariant,
    cells: &[CellSpec],
    make_policy: F,
) -> Result<(Vec<CellReport>, Vec<TraceRow>)>
where
    F: Fn() -> Box<dyn SearchPolicy + 'p> + Sync + Send,
{
    let results = parallel::map(settings.execution, cells, |cell| -> Result<(CellReport, Vec<TraceRow>)> {
        let seed = derive_seed(settings.seed, &[tag::EVAL, cell.hole_id as u64, cell.key]);
        let mut env = SearchEnv::new(wall.clone(), env_cfg.clone(), settings.peg.clone(), seed)?;
        let mut policy = make_policy();
        let mut summaries = Vec::with_capacity(cell.starts.len());
        let mut traces = Vec::new();
        for (episode, &start) in cell.starts.iter().enumerate() {
            let keep = episode < settings.trace_episodes;
            let mut record = |ev: &ProbeEvent<'_>| {
                if keep {
                    traces.push(TraceRow {
                        hole_id: cell.hole_id,
                        init_label: cell.label.clone(),
                        episode: episode + 1,
                        step: ev.step,
                        peg_xy: ev.peg_xy,
                        contact: *ev.contact,
                        action: ev.action,
                    });
                }
            };
            summaries.push(run_episode(
                &mut env,
                policy.as_mut(),
                cell.hole_id,
                start,
                variant,
                &mut record,
            )?);
        }
        let report = CellReport::from_episodes(cell.hole_id, cell.label.clone(), &summaries, env_cfg.step_time_s);
        Ok((report, traces))
    });
    let mut reports = Vec::with_capacity(results.len());
    let mut traces = Vec::new();
    for r in results {
        let (c, t) = r?;
        reports.push(c);
        traces.extend(t);
    }
    Ok((reports, traces))
}

fn named_cells(
    wall: &WallModel,
    holes: &[usize],
    init_positions: &[usize],
    episodes: usize,
) -> Result<Vec<CellSpec>> {
    if episodes == 0 {
        return Ok(Vec::new());
    }
    let mut cells = Vec::with_capacity(holes.len() * init_positions.len());
    for &h in holes {
        wall.hole(h)?;
        for &p in init_positions {
            cells.push(CellSpec {
                hole_id: h,
                label: p.to_string(),
                key: p as u64,
                starts: vec![init_position(p)?; episodes],
            });
        }
    }
    Ok(cells)
}

fn check_variant(checkpoint: &Checkpoint, variant: StateVariant) -> Result<()> {
    if checkpoint.meta.variant != variant {
        return Err(Error::usage(format!(
            "checkpoint was trained on {} but {} was requested",
            checkpoint.meta.variant, variant
        )));
    }
    Ok(())
}

/// Greedy rollouts of the checkpoint from named initial positions.
pub fn evaluate(
    checkpoint: &Checkpoint,
    wall: &WallModel,
    holes: &[usize],
    init_positions: &[usize],
    variant: StateVariant,
    settings: &EvalSettings,
) -> Result<EvalOutput> {
    check_variant(checkpoint, variant)?;
    let cells = named_cells(wall, holes, init_positions, settings.episodes_per_cell)?;
    let net = &checkpoint.network;
    let (cells, traces) = run_cells(wall, &settings.env, settings, variant, &cells, || {
        Box::new(DqnPolicy { net })
    })?;
    Ok(EvalOutput {
        report: EvalReport {
            method: "dqn".into(),
            variant: Some(variant),
            cells,
        },
        traces,
    })
}

/// Square annulus of lattice start points: `min ≤ max(|x|, |y|) ≤ max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomInitGrid {
    pub min_mm: f64,
    pub max_mm: f64,
    pub spacing_mm: f64,
}

impl Default for RandomInitGrid {
    fn default() -> Self {
        RandomInitGrid {
            min_mm: 2.0,
            max_mm: 3.0,
            spacing_mm: 0.1,
        }
    }
}

pub fn random_init_grid(grid: &RandomInitGrid) -> Result<Vec<[f64; 2]>> {
    let RandomInitGrid {
        min_mm,
        max_mm,
        spacing_mm,
    } = *grid;
    if !(min_mm.is_finite() && max_mm.is_finite() && spacing_mm.is_finite())
        || spacing_mm <= 0.0
        || min_mm < 0.0
        || min_mm > max_mm
    {
        return Err(Error::config(format!("invalid random start grid {grid:?}")));
    }
    let n = (max_mm / spacing_mm + 1e-9).floor() as i64;
    let tol = 1e-9 * spacing_mm.max(1.0);
    let mut points = Vec::new();
    for i in -n..=n {
        for j in -n..=n {
            let r = i.abs().max(j.abs()) as f64 * spacing_mm;
            if r + tol >= min_mm && r <= max_mm + tol {
                points.push([i as f64 * spacing_mm, j as f64 * spacing_mm]);
            }
        }
    }
    if points.is_empty() {
        return Err(Error::config(format!("random start grid {grid:?} has no points")));
    }
    Ok(points)
}

/// Greedy rollouts from start points drawn uniformly from `grid`;
/// `settings.episodes_per_cell` episodes per hole.
pub fn evaluate_random_inits(
    checkpoint: &Checkpoint,
    wall: &WallModel,
    holes: &[usize],
    grid: &RandomInitGrid,
    variant: StateVariant,
    settings: &EvalSettings,
) -> Result<EvalOutput> {
    check_variant(checkpoint, variant)?;
    let points = random_init_grid(grid)?;
    let mut cells = Vec::new();
    if settings.episodes_per_cell > 0 {
        for &h in holes {
            wall.hole(h)?;
            let mut rng = stream(settings.seed, &[tag::INIT_POS, h as u64]);
            let starts = (0..settings.episodes_per_cell)
                .map(|_| *points.choose(&mut rng).expect("grid is non-empty"))
                .collect();
            cells.push(CellSpec {
                hole_id: h,
                label: "rand".into(),
                key: u64::MAX,
                starts,
            });
        }
    }
    let net = &checkpoint.network;
    let (cells, traces) = run_cells(wall, &settings.env, settings, variant, &cells, || {
        Box::new(DqnPolicy { net })
    })?;
    Ok(EvalOutput {
        report: EvalReport {
            method: "dqn-random-init".into(),
            variant: Some(variant),
            cells,
        },
        traces,
    })
}

/// Runs a model-based baseline through the same episode loop.
pub fn run_baseline(
    method: Baseline,
    wall: &WallModel,
    holes: &[usize],
    init_positions: &[usize],
    settings: &EvalSettings,
) -> Result<EvalOutput> {
    let cells = named_cells(wall, holes, init_positions, settings.episodes_per_cell)?;
    let mut env_cfg = settings.env.clone();
    if let Baseline::Spiral { rings } = method {
        let side = 2 * rings + 1;
        env_cfg.boundary_exit = false;
        env_cfg.k_max = (side * side - 1).max(1) as usize;
    }
    let (cells, traces) = match method {
        Baseline::Spiral { .. } => run_cells(wall, &env_cfg, settings, StateVariant::S1, &cells, || {
            Box::new(SpiralPolicy::new())
        })?,
        Baseline::Moment { margin_mm } => {
            run_cells(wall, &env_cfg, settings, StateVariant::S1, &cells, move || {
                Box::new(MomentPolicy::new(margin_mm))
            })?
        }
    };
    Ok(EvalOutput {
        report: EvalReport {
            method: method.name().into(),
            variant: None,
            cells,
        },
        traces,
    })
}
