//! Small dense ReLU network with hand-written backpropagation.
//!
//! Parameters live in one flat `Vec<f64>`. Layer `l` (mapping `n_in` to
//! `n_out` units) occupies `n_out * n_in` row-major weights followed by
//! `n_out` biases; layers are stored in order. Gradients, Adam moments and
//! the checkpoint payload all share this layout.

mod adam;
mod checkpoint;
mod saliency;

use rand::Rng;

use crate::environment::{Observation, N_ACTIONS, OBS_DIM};
use crate::error::{Error, Result};
use crate::rng::{stream, tag};

pub use adam::{adam_update, AdamState};
pub use checkpoint::{Checkpoint, TrainingMeta, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use saliency::guided_backprop;

/// Three hidden layers of sixteen rectifier units.
pub const Q_LAYER_SIZES: [usize; 5] = [OBS_DIM, 16, 16, 16, N_ACTIONS];

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Gradient with the same layout as [`Network::params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub Vec<f64>);

impl Gradients {
    pub fn zeros_like(net: &Network) -> Gradients {
        Gradients(vec![0.0; net.n_params()])
    }

    pub fn scale(&mut self, c: f64) {
        self.0.iter_mut().for_each(|g| *g *= c);
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, g| m.max(g.abs()))
    }
}

/// Per-layer values kept from a forward pass.
pub(crate) struct Trace {
    /// `activations[0]` is the input; `activations[l + 1]` is the output of layer `l`.
    pub activations: Vec<Vec<f64>>,
    /// Pre-activation of each layer.
    pub pre: Vec<Vec<f64>>,
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
}

impl Network {
    /// All-zero network.
    pub fn zeros(sizes: &[usize]) -> Result<Network> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::config(format!("invalid layer sizes {sizes:?}")));
        }
        Ok(Network {
            sizes: sizes.to_vec(),
            params: vec![0.0; param_count(sizes)],
        })
    }

    pub fn from_params(sizes: &[usize], params: Vec<f64>) -> Result<Network> {
        let mut net = Network::zeros(sizes)?;
        if params.len() != net.params.len() {
            return Err(Error::Shape {
                expected: net.params.len(),
                actual: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::config("network parameters must be finite"));
        }
        net.params = params;
        Ok(net)
    }

    /// He-uniform weights, `U(-√(6/fan_in), √(6/fan_in))`; zero biases.
    pub fn init(sizes: &[usize], seed: u64) -> Result<Network> {
        let mut net = Network::zeros(sizes)?;
        let mut rng = stream(seed, &[tag::NET_INIT]);
        for l in 0..net.n_layers() {
            let limit = init_limit(net.sizes[l]);
            let (w, _) = net.layer_mut(l);
            for v in w.iter_mut() {
                *v = rng.random_range(-limit..limit);
            }
        }
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn n_inputs(&self) -> usize {
        self.sizes[0]
    }

    pub fn n_outputs(&self) -> usize {
        *self.sizes.last().expect("at least two sizes")
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn layer_offset(&self, l: usize) -> usize {
        param_count(&self.sizes[..=l])
    }

    /// `(weights, biases)` of layer `l`.
    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
        let off = self.layer_offset(l);
        let (w, rest) = self.params[off..].split_at(n_in * n_out);
        (w, &rest[..n_out])
    }

    pub fn layer_mut(&mut self, l: usize) -> (&mut [f64], &mut [f64]) {
        let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
        let off = self.layer_offset(l);
        let (w, rest) = self.params[off..].split_at_mut(n_in * n_out);
        (w, &mut rest[..n_out])
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_inputs() {
            return Err(Error::Shape {
                expected: self.n_inputs(),
                actual: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::usage("network input must be finite"));
        }
        Ok(())
    }

    pub(crate) fn trace(&self, x: &[f64]) -> Trace {
        let mut activations = Vec::with_capacity(self.sizes.len());
        let mut pre = Vec::with_capacity(self.n_layers());
        activations.push(x.to_vec());
        for l in 0..self.n_layers() {
            let (w, b) = self.layer(l);
            let input = &activations[l];
            let n_in = input.len();
            let z: Vec<f64> = b
                .iter()
                .enumerate()
                .map(|(o, &bias)| {
                    let row = &w[o * n_in..(o + 1) * n_in];
                    bias + row.iter().zip(input).map(|(wi, xi)| wi * xi).sum::<f64>()
                })
                .collect();
            let a = if l + 1 == self.n_layers() {
                z.clone()
            } else {
                z.iter().map(|&v| v.max(0.0)).collect()
            };
            pre.push(z);
            activations.push(a);
        }
        Trace { activations, pre }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.trace(x).activations.pop().expect("output layer"))
    }

    /// Q-values of the four actions.
    pub fn q_values(&self, obs: &Observation) -> Result<[f64; N_ACTIONS]> {
        let out = self.forward(&obs.values)?;
        out.try_into().map_err(|v: Vec<f64>| Error::Shape {
            expected: N_ACTIONS,
            actual: v.len(),
        })
    }

    /// Adds to `grads` the parameter gradient of a loss whose derivative with
    /// respect to the network output is `d_out`.
    pub(crate) fn accumulate_backward(&self, tr: &Trace, d_out: &[f64], grads: &mut [f64]) {
        let mut delta = d_out.to_vec();
        for l in (0..self.n_layers()).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            if l + 1 != self.n_layers() {
                for (d, z) in delta.iter_mut().zip(&tr.pre[l]) {
                    if *z <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            let off = self.layer_offset(l);
            let input = &tr.activations[l];
            let (gw, rest) = grads[off..].split_at_mut(n_in * n_out);
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                for (g, &xi) in gw[o * n_in..(o + 1) * n_in].iter_mut().zip(input) {
                    *g += d * xi;
                }
                rest[o] += d;
            }
            if l > 0 {
                let (w, _) = self.layer(l);
                let mut prev = vec![0.0; n_in];
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    for (p, &wi) in prev.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                        *p += d * wi;
                    }
                }
                delta = prev;
            }
        }
    }

    /// Gradient of `½(td_target - Q(x, action))²`, with the target held fixed.
    pub fn backward(&self, x: &[f64], action: usize, td_target: f64) -> Result<Gradients> {
        self.check_input(x)?;
        if action >= self.n_outputs() {
            return Err(Error::usage(format!("action index {action} out of range")));
        }
        let tr = self.trace(x);
        let q = tr.activations.last().expect("output")[action];
        let mut d_out = vec![0.0; self.n_outputs()];
        d_out[action] = q - td_target;
        let mut grads = Gradients::zeros_like(self);
        self.accumulate_backward(&tr, &d_out, &mut grads.0);
        Ok(grads)
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }
}

pub fn init_limit(fan_in: usize) -> f64 {
    (6.0 / fan_in as f64).sqrt()
}

/// Fresh Q-network with the standard layer sizes.
pub fn init_network(seed: u64) -> Network {
    Network::init(&Q_LAYER_SIZES, seed).expect("static sizes are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::StateVariant;

    #[test]
    fn init_is_deterministic_and_bounded() {
        let a = init_network(1);
        let b = init_network(1);
        let c = init_network(2);
        assert_eq!(a, b);
        assert_ne!(a.params(), c.params());
        for l in 0..a.n_layers() {
            let limit = init_limit(a.sizes()[l]);
            let (w, bias) = a.layer(l);
            assert!(w.iter().all(|v| v.abs() <= limit));
            assert!(bias.iter().all(|&v| v == 0.0));
        }
        assert_eq!(a.n_params(), 6 * 16 + 16 + 2 * (16 * 16 + 16) + 16 * 4 + 4);
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = Network::zeros(&Q_LAYER_SIZES).unwrap();
        let obs = Observation {
            values: [0.3, -0.2, 0.9, 0.1, 0.0, 0.5],
            variant: StateVariant::S1,
        };
        assert_eq!(net.q_values(&obs).unwrap(), [0.0; 4]);
    }

    #[test]
    fn hand_computed_two_layer_map() {
        // 2 -> 2 -> 1, all pre-activations positive so ReLU is identity.
        let params = vec![
            1.0, 2.0, // hidden unit 0
            0.5, -1.0, // hidden unit 1
            0.1, 0.2, // hidden biases
            3.0, -2.0, // output weights
            0.5, // output bias
        ];
        let net = Network::from_params(&[2, 2, 1], params).unwrap();
        // h0 = 1*1 + 2*0.5 + 0.1 = 2.1, h1 = 0.5*1 - 0.5 + 0.2 = 0.2
        // y = 3*2.1 - 2*0.2 + 0.5 = 6.4
        let y = net.forward(&[1.0, 0.5]).unwrap();
        assert!((y[0] - 6.4).abs() < 1e-12);
    }

    #[test]
    fn forward_is_pure_and_checks_arity() {
        let net = init_network(3);
        let x = [0.1, 0.2, -0.3, 0.4, -0.5, 0.6];
        assert_eq!(net.forward(&x).unwrap(), net.forward(&x).unwrap());
        assert!(matches!(net.forward(&x[..5]), Err(Error::Shape { .. })));
        assert!(net.forward(&[f64::NAN; 6]).is_err());
    }

    #[test]
    fn zero_residual_zero_gradient() {
        let net = init_network(4);
        let x = [0.1, 0.2, -0.3, 0.4, -0.5, 0.6];
        let q = net.forward(&x).unwrap();
        let g = net.backward(&x, 2, q[2]).unwrap();
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn gradient_linear_in_residual() {
        let net = init_network(5);
        let x = [0.7, -0.2, -0.6, 0.1, 0.3, 0.2];
        let q = net.forward(&x).unwrap()[1];
        let g1 = net.backward(&x, 1, q - 1.0).unwrap();
        let g3 = net.backward(&x, 1, q - 3.0).unwrap();
        for (a, b) in g1.0.iter().zip(&g3.0) {
            assert!((3.0 * a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
        assert!(net.backward(&x, 4, 0.0).is_err());
    }

    #[test]
    fn from_params_validates() {
        assert!(Network::from_params(&[2, 1], vec![0.0; 2]).is_err());
        assert!(Network::from_params(&[2, 1], vec![0.0, f64::NAN, 0.0]).is_err());
        assert!(Network::zeros(&[3]).is_err());
    }
}
