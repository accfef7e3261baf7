use super::Network;
use crate::error::{Error, Result};

/// Guided backpropagation of output `action` to the inputs.
///
/// The backward signal passes a rectifier only where the forward
/// pre-activation was positive and the signal itself is non-negative. The
/// returned importance is the absolute input signal.
pub fn guided_backprop(net: &Network, x: &[f64], action: usize) -> Result<Vec<f64>> {
    net.check_input(x)?;
    if action >= net.n_outputs() {
        return Err(Error::usage(format!("action index {action} out of range")));
    }
    let tr = net.trace(x);
    let mut signal = vec![0.0; net.n_outputs()];
    signal[action] = 1.0;
    for l in (0..net.n_layers()).rev() {
        if l + 1 != net.n_layers() {
            for (s, z) in signal.iter_mut().zip(&tr.pre[l]) {
                if *z <= 0.0 || *s < 0.0 {
                    *s = 0.0;
                }
            }
        }
        let n_in = net.sizes()[l];
        let (w, _) = net.layer(l);
        let mut prev = vec![0.0; n_in];
        for (o, &s) in signal.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            for (p, &wi) in prev.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                *p += s * wi;
            }
        }
        signal = prev;
    }
    Ok(signal.into_iter().map(f64::abs).collect())
}
