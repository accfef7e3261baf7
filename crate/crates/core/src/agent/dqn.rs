use super::boltzmann::argmax;
use super::{AgentConfig, Transition};
use crate::error::{Error, Result};
use crate::neuralnet::{adam_update, AdamState, Gradients, Network};

/// TD residuals measured before the update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainStats {
    pub mean_abs_td: f64,
    pub mean_sq_td: f64,
}

fn td_target(target: &Network, main: &Network, t: &Transition, cfg: &AgentConfig) -> f64 {
    if t.done {
        return t.reward;
    }
    let next_q = target.trace(&t.next_state).activations.pop().expect("output");
    let bootstrap = if cfg.double_dqn {
        let main_q = main.trace(&t.next_state).activations.pop().expect("output");
        next_q[argmax(&main_q)]
    } else {
        next_q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };
    t.reward + cfg.gamma * bootstrap
}

/// One Adam step on the batch-mean of `½(y - Q(s, a))²` with
/// `y = r` for terminal transitions and `y = r + γ·max_a' Q_target(s', a')`
/// otherwise. `target` is not modified.
pub fn train_step(
    main: &mut Network,
    target: &Network,
    batch: &[&Transition],
    cfg: &AgentConfig,
    adam: &mut AdamState,
) -> Result<TrainStats> {
    if batch.is_empty() {
        return Err(Error::usage("train_step needs a non-empty batch"));
    }
    let mut grads = Gradients::zeros_like(main);
    let mut d_out = vec![0.0; main.n_outputs()];
    let (mut abs_sum, mut sq_sum) = (0.0, 0.0);
    for t in batch {
        if t.action >= main.n_outputs() {
            return Err(Error::usage(format!("transition action {} out of range", t.action)));
        }
        let y = td_target(target, main, t, cfg);
        let tr = main.trace(&t.state);
        let q = tr.activations.last().expect("output")[t.action];
        let residual = q - y;
        abs_sum += residual.abs();
        sq_sum += residual * residual;
        d_out.iter_mut().for_each(|d| *d = 0.0);
        d_out[t.action] = residual;
        main.accumulate_backward(&tr, &d_out, &mut grads.0);
    }
    let n = batch.len() as f64;
    grads.scale(1.0 / n);
    adam_update(main, &grads, adam)?;
    Ok(TrainStats {
        mean_abs_td: abs_sum / n,
        mean_sq_td: sq_sum / n,
    })
}

pub fn sync_target(main: &Network, target: &mut Network) {
    target.clone_from(main);
}
