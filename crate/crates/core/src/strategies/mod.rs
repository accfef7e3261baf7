//! Search policies sharing one action interface: the trained Q-network,
//! a blind square spiral, and a force/moment feedback heuristic.

pub mod moment;
pub mod spiral;

use crate::agent::argmax;
use crate::environment::{Action, ContactResult, Observation};
use crate::error::Result;
use crate::neuralnet::Network;

pub use moment::{moment_next, MomentSearchState, DEFAULT_CHAMFER_MARGIN_MM};
pub use spiral::{spiral_index_of, spiral_next, spiral_position, SpiralState};

/// A policy driven by the probe readings of one episode.
pub trait SearchPolicy {
    /// Called once with the probe made at the initial position.
    fn begin(&mut self, first: &ContactResult, obs: &Observation);

    fn next_action(&mut self, contact: &ContactResult, obs: &Observation) -> Result<Action>;
}

/// Greedy action of the Q-network.
pub fn dqn_next(net: &Network, obs: &Observation) -> Result<Action> {
    Action::from_index(argmax(&net.q_values(obs)?))
}

pub struct DqnPolicy<'a> {
    pub net: &'a Network,
}

impl SearchPolicy for DqnPolicy<'_> {
    fn begin(&mut self, _first: &ContactResult, _obs: &Observation) {}

    fn next_action(&mut self, _contact: &ContactResult, obs: &Observation) -> Result<Action> {
        dqn_next(self.net, obs)
    }
}

/// Walks the square spiral outward from the initial position.
pub struct SpiralPolicy {
    state: SpiralState,
}

impl SpiralPolicy {
    pub fn new() -> SpiralPolicy {
        SpiralPolicy {
            state: SpiralState::default(),
        }
    }
}

impl Default for SpiralPolicy {
    fn default() -> Self {
        SpiralPolicy::new()
    }
}

impl SearchPolicy for SpiralPolicy {
    fn begin(&mut self, _first: &ContactResult, _obs: &Observation) {
        self.state = SpiralState::default();
    }

    fn next_action(&mut self, _contact: &ContactResult, _obs: &Observation) -> Result<Action> {
        let from = spiral_position(self.state.index);
        spiral_next(&mut self.state);
        let to = spiral_position(self.state.index);
        Ok(Action::from_delta((to.0 - from.0, to.1 - from.1))
            .expect("consecutive spiral points are lattice neighbours"))
    }
}

pub struct MomentPolicy {
    margin_mm: f64,
    state: Option<MomentSearchState>,
}

impl MomentPolicy {
    pub fn new(margin_mm: f64) -> MomentPolicy {
        MomentPolicy {
            margin_mm,
            state: None,
        }
    }
}

impl Default for MomentPolicy {
    fn default() -> Self {
        MomentPolicy::new(DEFAULT_CHAMFER_MARGIN_MM)
    }
}

impl SearchPolicy for MomentPolicy {
    fn begin(&mut self, first: &ContactResult, _obs: &Observation) {
        self.state = Some(MomentSearchState::new(first, self.margin_mm));
    }

    fn next_action(&mut self, contact: &ContactResult, _obs: &Observation) -> Result<Action> {
        let state = self.state.get_or_insert_with(|| MomentSearchState::new(contact, self.margin_mm));
        Ok(moment_next(state, contact))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::StateVariant;
    use crate::neuralnet::Q_LAYER_SIZES;

    fn blank() -> (ContactResult, Observation) {
        let c = ContactResult {
            fx: 0.0,
            fy: 0.0,
            fz: -20.0,
            mx: 0.0,
            my: 0.0,
            mz: 0.0,
            dz: 1.0,
            inserted: false,
        };
        (c, Observation::from_contact(&c, StateVariant::S1))
    }

    #[test]
    fn spiral_policy_emits_the_enumeration() {
        let (c, o) = blank();
        let mut p = SpiralPolicy::new();
        p.begin(&c, &o);
        let mut pos = (0i64, 0i64);
        for i in 1..50 {
            let (dx, dy) = p.next_action(&c, &o).unwrap().delta();
            pos = (pos.0 + dx, pos.1 + dy);
            assert_eq!(pos, spiral_position(i));
        }
    }

    #[test]
    fn dqn_policy_is_greedy() {
        let mut net = Network::zeros(&Q_LAYER_SIZES).unwrap();
        let last = net.n_layers() - 1;
        net.layer_mut(last).1.copy_from_slice(&[3.0, 3.0, 1.0, 1.0]);
        let (c, o) = blank();
        let mut p = DqnPolicy { net: &net };
        assert_eq!(p.next_action(&c, &o).unwrap(), Action::PlusX);
        assert_eq!(dqn_next(&net, &o).unwrap(), Action::PlusX);
    }
}
