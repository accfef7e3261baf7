use std::fmt::Write;

use super::eval::{run_episode, EvalSettings};
use crate::environment::{init_position, SearchEnv, StateVariant, WallModel, OBS_DIM};
use crate::error::{Error, Result};
use crate::neuralnet::{guided_backprop, Checkpoint};
use crate::parallel;
use crate::rng::{derive_seed, tag};
use crate::strategies::DqnPolicy;

/// Mean guided-backprop importance of each input over the decisions of one
/// hole's greedy episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyRow {
    pub hole_id: usize,
    /// Decisions averaged.
    pub steps: usize,
    pub mean: [f64; OBS_DIM],
}

impl SaliencyRow {
    /// Each input's fraction of the total importance.
    pub fn shares(&self) -> [f64; OBS_DIM] {
        let total: f64 = self.mean.iter().sum();
        let mut s = [0.0; OBS_DIM];
        if total > 0.0 {
            for (si, m) in s.iter_mut().zip(&self.mean) {
                *si = m / total;
            }
        }
        s
    }

    /// Index of the most important input; lowest index wins ties.
    pub fn dominant(&self) -> usize {
        crate::agent::argmax(&self.mean)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyReport {
    pub variant: StateVariant,
    pub labels: [&'static str; OBS_DIM],
    pub per_hole: Vec<SaliencyRow>,
    /// Decision-weighted mean over all holes.
    pub aggregate: SaliencyRow,
}

impl SaliencyReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("hole,steps,{}\n", self.labels.join(","));
        for r in self.per_hole.iter().chain(std::iter::once(&self.aggregate)) {
            let hole = if r.hole_id == 0 { "all".to_string() } else { r.hole_id.to_string() };
            let vals: Vec<String> = r.mean.iter().map(f64::to_string).collect();
            let _ = writeln!(out, "{},{},{}", hole, r.steps, vals.join(","));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("saliency ({})\n{:>6}", self.variant, "hole");
        for l in self.labels {
            let _ = write!(out, " {l:>8}");
        }
        out.push('\n');
        for r in self.per_hole.iter().chain(std::iter::once(&self.aggregate)) {
            let hole = if r.hole_id == 0 { "all".to_string() } else { r.hole_id.to_string() };
            let _ = write!(out, "{hole:>6}");
            for s in r.shares() {
                let _ = write!(out, " {:>7.1}%", 100.0 * s);
            }
            out.push('\n');
        }
        out
    }
}

/// Greedy rollouts of the checkpoint's variant; every decision contributes
/// the guided-backprop importance of the chosen action.
pub fn saliency_report(
    checkpoint: &Checkpoint,
    wall: &WallModel,
    holes: &[usize],
    init_positions: &[usize],
    settings: &EvalSettings,
) -> Result<SaliencyReport> {
    if holes.is_empty() || init_positions.is_empty() {
        return Err(Error::usage("saliency needs at least one hole and one initial position"));
    }
    let variant = checkpoint.meta.variant;
    let starts = init_positions
        .iter()
        .map(|&p| init_position(p).map(|xy| (p, xy)))
        .collect::<Result<Vec<_>>>()?;
    for &h in holes {
        wall.hole(h)?;
    }
    let net = &checkpoint.network;
    let rows = parallel::map(settings.execution, holes, |&h| -> Result<SaliencyRow> {
        let mut sum = [0.0; OBS_DIM];
        let mut steps = 0;
        for &(p, xy) in &starts {
            let seed = derive_seed(settings.seed, &[tag::EVAL, h as u64, p as u64]);
            let mut env = SearchEnv::new(wall.clone(), settings.env.clone(), settings.peg.clone(), seed)?;
            let mut policy = DqnPolicy { net };
            for _ in 0..settings.episodes_per_cell {
                let mut failure = None;
                run_episode(&mut env, &mut policy, h, xy, variant, &mut |ev| {
                    if let Some(a) = ev.action {
                        match guided_backprop(net, &ev.observation.values, a.index()) {
                            Ok(g) => {
                                for (s, gi) in sum.iter_mut().zip(g) {
                                    *s += gi;
                                }
                                steps += 1;
                            }
                            Err(e) => failure = Some(e),
                        }
                    }
                })?;
                if let Some(e) = failure {
                    return Err(e);
                }
            }
        }
        Ok(SaliencyRow { hole_id: h, steps, mean: mean_of(sum, steps) })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut total = [0.0; OBS_DIM];
    let mut steps = 0;
    for r in &rows {
        for (t, m) in total.iter_mut().zip(&r.mean) {
            *t += m * r.steps as f64;
        }
        steps += r.steps;
    }
    Ok(SaliencyReport {
        variant,
        labels: variant.input_labels(),
        per_hole: rows,
        aggregate: SaliencyRow { hole_id: 0, steps, mean: mean_of(total, steps) },
    })
}

fn mean_of(sum: [f64; OBS_DIM], n: usize) -> [f64; OBS_DIM] {
    let mut m = sum;
    if n > 0 {
        for v in &mut m {
            *v /= n as f64;
        }
    }
    m
}
