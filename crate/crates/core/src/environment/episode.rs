use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::contact::{probe, ContactResult, PegSpec};
use super::reward::compute_reward;
use super::wall::WallModel;
use super::{Action, EnvConfig, Observation, StateVariant};
use crate::error::{Error, Result};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Found,
    BoundaryExit,
    MaxSteps,
    Running,
}

impl Outcome {
    pub fn is_terminal(self) -> bool {
        self != Outcome::Running
    }
}

/// Public view of the running episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeState {
    pub hole_id: usize,
    /// Peg offset from the hole center.
    pub peg_xy: [f64; 2],
    pub d0: f64,
    pub step_count: usize,
    pub done: bool,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub outcome: Outcome,
    pub contact: ContactResult,
}

#[derive(Debug, Clone)]
struct Episode {
    state: EpisodeState,
    hole_index: usize,
    init_xy: [f64; 2],
    /// Lattice steps taken from `init_xy`; the position is recomputed from
    /// this so revisited spots are bit-identical.
    offset: (i64, i64),
    variant: StateVariant,
    contact: ContactResult,
}

/// One simulated search cell: a wall, a peg, and a private noise stream.
///
/// Instances share nothing, so parallel evaluation runs one per worker.
#[derive(Debug, Clone)]
pub struct SearchEnv {
    wall: WallModel,
    cfg: EnvConfig,
    peg: PegSpec,
    rng: SimRng,
    episode: Option<Episode>,
}

impl SearchEnv {
    pub fn new(wall: WallModel, cfg: EnvConfig, peg: PegSpec, seed: u64) -> Result<SearchEnv> {
        cfg.validate()?;
        peg.validate()?;
        wall.validate()?;
        if let Some(h) = wall.holes.iter().find(|h| h.depth_available_mm <= cfg.dz_threshold_mm) {
            return Err(Error::config(format!(
                "hole {} is shallower than the displacement threshold",
                h.id
            )));
        }
        Ok(SearchEnv {
            wall,
            cfg,
            peg,
            rng: SimRng::seed_from_u64(seed),
            episode: None,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn wall(&self) -> &WallModel {
        &self.wall
    }

    pub fn state(&self) -> Option<&EpisodeState> {
        self.episode.as_ref().map(|e| &e.state)
    }

    /// Reading of the most recent probe.
    pub fn last_contact(&self) -> Option<&ContactResult> {
        self.episode.as_ref().map(|e| &e.contact)
    }

    /// Places the peg at `init_xy`, probes once and starts the episode. If
    /// that first probe already inserts, the episode is over before any step.
    pub fn reset(
        &mut self,
        hole_id: usize,
        init_xy: [f64; 2],
        variant: StateVariant,
    ) -> Result<Observation> {
        let hole_index = self.wall.hole(hole_id)?.id - 1;
        if !(init_xy[0].is_finite() && init_xy[1].is_finite()) {
            return Err(Error::usage("initial position must be finite"));
        }
        let contact = self.probe_at(hole_index, init_xy);
        let (done, outcome) = if contact.inserted {
            (true, Outcome::Found)
        } else {
            (false, Outcome::Running)
        };
        self.episode = Some(Episode {
            state: EpisodeState {
                hole_id,
                peg_xy: init_xy,
                d0: init_xy[0].hypot(init_xy[1]),
                step_count: 0,
                done,
                outcome,
            },
            hole_index,
            init_xy,
            offset: (0, 0),
            variant,
            contact,
        });
        Ok(Observation::from_contact(&contact, variant))
    }

    /// Detach, move one lattice step along `action`, probe again.
    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        let ep = self
            .episode
            .as_ref()
            .ok_or_else(|| Error::usage("step called before reset"))?;
        if ep.state.done {
            return Err(Error::usage("step called on a finished episode"));
        }
        let (dx, dy) = action.delta();
        let offset = (ep.offset.0 + dx, ep.offset.1 + dy);
        let peg_xy = [
            ep.init_xy[0] + self.cfg.dxy_mm * offset.0 as f64,
            ep.init_xy[1] + self.cfg.dxy_mm * offset.1 as f64,
        ];
        let hole_index = ep.hole_index;
        let contact = self.probe_at(hole_index, peg_xy);

        let cfg = &self.cfg;
        let ep = self.episode.as_mut().expect("checked above");
        ep.offset = offset;
        ep.contact = contact;
        let st = &mut ep.state;
        st.peg_xy = peg_xy;
        st.step_count += 1;
        let d = peg_xy[0].hypot(peg_xy[1]);
        st.outcome = if contact.inserted {
            Outcome::Found
        } else if cfg.boundary_exit && d > cfg.distance_limit_mm {
            Outcome::BoundaryExit
        } else if st.step_count >= cfg.k_max {
            Outcome::MaxSteps
        } else {
            Outcome::Running
        };
        st.done = st.outcome.is_terminal();
        let reward = if st.done {
            compute_reward(st.outcome, d, st.d0, cfg.distance_limit_mm, cfg.r_foundhole)
        } else {
            -1.0
        };
        Ok(StepResult {
            observation: Observation::from_contact(&contact, ep.variant),
            reward,
            done: st.done,
            outcome: st.outcome,
            contact,
        })
    }

    fn probe_at(&mut self, hole_index: usize, xy: [f64; 2]) -> ContactResult {
        let hole = &self.wall.holes[hole_index];
        let noise = if self.cfg.noise { Some(&mut self.rng) } else { None };
        probe(hole, &self.peg, xy, &self.cfg, noise)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{make_wall, GeometryRanges};

    fn env(noise: bool) -> SearchEnv {
        let wall = make_wall(3, 1, &GeometryRanges::default()).unwrap();
        let cfg = EnvConfig {
            noise,
            ..EnvConfig::default()
        };
        SearchEnv::new(wall, cfg, PegSpec::wedge(), 42).unwrap()
    }

    #[test]
    fn reset_records_start_distance() {
        let mut e = env(true);
        e.reset(1, [3.0, 0.0], StateVariant::S1).unwrap();
        let st = e.state().unwrap();
        assert_eq!(st.d0, 3.0);
        assert_eq!(st.step_count, 0);
        assert!(!st.done);
    }

    #[test]
    fn reset_on_center_is_found() {
        let mut e = env(true);
        e.reset(2, [0.0, 0.0], StateVariant::S1).unwrap();
        let st = e.state().unwrap();
        assert!(st.done);
        assert_eq!(st.outcome, Outcome::Found);
        assert!(e.step(Action::PlusX).is_err());
    }

    #[test]
    fn unknown_hole_is_an_error() {
        let mut e = env(true);
        assert!(matches!(
            e.reset(4, [3.0, 0.0], StateVariant::S1),
            Err(Error::UnknownHole(4))
        ));
    }

    #[test]
    fn step_into_hole() {
        let mut e = env(false);
        e.reset(1, [1.0, 0.0], StateVariant::S1).unwrap();
        let r = e.step(Action::MinusX).unwrap();
        assert!(r.done);
        assert_eq!(r.outcome, Outcome::Found);
        assert_eq!(r.reward, 100.0);
        assert_eq!(e.state().unwrap().peg_xy, [0.0, 0.0]);
    }

    #[test]
    fn step_out_of_bounds() {
        let mut e = env(false);
        e.reset(1, [3.5, 0.0], StateVariant::S1).unwrap();
        let r = e.step(Action::PlusX).unwrap();
        assert_eq!(e.state().unwrap().peg_xy, [4.5, 0.0]);
        assert_eq!(r.outcome, Outcome::BoundaryExit);
        assert!(r.done);
        assert!(r.reward < 0.0);
    }

    #[test]
    fn non_terminal_step_costs_one() {
        let mut e = env(true);
        e.reset(1, [3.0, 0.0], StateVariant::S1).unwrap();
        let r = e.step(Action::PlusY).unwrap();
        assert!(!r.done);
        assert_eq!(r.reward, -1.0);
    }

    #[test]
    fn episode_capped_at_k_max() {
        let wall = make_wall(1, 1, &GeometryRanges::default()).unwrap();
        let cfg = EnvConfig {
            k_max: 6,
            ..EnvConfig::default()
        };
        let mut e = SearchEnv::new(wall, cfg, PegSpec::wedge(), 1).unwrap();
        e.reset(1, [3.0, 0.0], StateVariant::S1).unwrap();
        let mut steps = 0;
        loop {
            let a = if steps % 2 == 0 { Action::PlusY } else { Action::MinusY };
            let r = e.step(a).unwrap();
            steps += 1;
            if r.done {
                assert_eq!(r.outcome, Outcome::MaxSteps);
                assert_eq!(r.reward, 0.0);
                break;
            }
        }
        assert_eq!(steps, 6);
        assert!(e.step(Action::PlusX).is_err());
    }

    #[test]
    fn identical_seeds_replay_identically() {
        let run = || {
            let mut e = env(true);
            let mut obs = vec![e.reset(1, [3.0, 0.0], StateVariant::S2).unwrap()];
            for a in [Action::PlusY, Action::MinusY, Action::MinusX, Action::MinusY] {
                let r = e.step(a).unwrap();
                obs.push(r.observation);
                if r.done {
                    break;
                }
            }
            obs
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn shallow_hole_rejected() {
        let mut wall = make_wall(1, 1, &GeometryRanges::default()).unwrap();
        wall.holes[0].depth_available_mm = 5.0;
        assert!(SearchEnv::new(wall, EnvConfig::default(), PegSpec::wedge(), 0).is_err());
    }
}
