use serde::{Deserialize, Serialize};

use super::{Gradients, Network};
use crate::error::{Error, Result};

/// Adam moments and hyper-parameters. Moments mirror the parameter layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn new(n_params: usize, alpha: f64) -> AdamState {
        AdamState::with_betas(n_params, alpha, 0.9, 0.999, 1e-8)
    }

    pub fn with_betas(n_params: usize, alpha: f64, beta1: f64, beta2: f64, eps: f64) -> AdamState {
        AdamState {
            alpha,
            beta1,
            beta2,
            eps,
            step: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
        }
    }

    pub fn for_network(net: &Network, alpha: f64) -> AdamState {
        AdamState::new(net.n_params(), alpha)
    }
}

/// One bias-corrected Adam step, descending along `grads`.
pub fn adam_update(net: &mut Network, grads: &Gradients, state: &mut AdamState) -> Result<()> {
    let n = net.n_params();
    for len in [grads.0.len(), state.m.len(), state.v.len()] {
        if len != n {
            return Err(Error::Shape {
                expected: n,
                actual: len,
            });
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - state.beta1.powi(t);
    let c2 = 1.0 - state.beta2.powi(t);
    let (b1, b2) = (state.beta1, state.beta2);
    for (((p, &g), m), v) in net
        .params_mut()
        .iter_mut()
        .zip(&grads.0)
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= state.alpha * m_hat / (v_hat.sqrt() + state.eps);
    }
    Ok(())
}
