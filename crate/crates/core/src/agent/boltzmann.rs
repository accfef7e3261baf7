use rand::Rng;

use crate::environment::{Action, Observation, N_ACTIONS};
use crate::error::{Error, Result};
use crate::neuralnet::Network;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionMode {
    /// Sample from the Boltzmann distribution.
    Explore,
    /// Highest Q-value, lowest index on ties.
    Greedy,
}

/// `P(a) = exp(Q(a)/τ) / Σ_i exp(Q(i)/τ)`, evaluated after subtracting the
/// maximum so that large Q-values cannot overflow.
pub fn boltzmann_probabilities(q: &[f64; N_ACTIONS], tau: f64) -> Result<[f64; N_ACTIONS]> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::config(format!("temperature must be positive, got {tau}")));
    }
    if q.iter().any(|v| !v.is_finite()) {
        return Err(Error::usage("Q-values must be finite"));
    }
    let max = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = q.map(|v| ((v - max) / tau).exp());
    let sum: f64 = e.iter().sum();
    Ok(e.map(|v| v / sum))
}

pub fn argmax(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in q.iter().enumerate().skip(1) {
        if v > q[best] {
            best = i;
        }
    }
    best
}

pub fn select_action<R: Rng + ?Sized>(
    net: &Network,
    obs: &Observation,
    tau: f64,
    rng: &mut R,
    mode: ActionMode,
) -> Result<Action> {
    let q = net.q_values(obs)?;
    let index = match mode {
        ActionMode::Greedy => argmax(&q),
        ActionMode::Explore => sample_index(&boltzmann_probabilities(&q, tau)?, rng),
    };
    Action::from_index(index)
}

pub(crate) fn sample_index<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}
