//! Dense feed-forward networks with hand-written reverse-mode gradients and
//! an Adam optimizer.
//!
//! Batches are stored column-wise: a `(features × batch)` matrix holds one
//! sample per column.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::NetError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, z: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            Activation::Relu => z.map(|v| v.max(0.0)),
            Activation::Tanh => z.map(f64::tanh),
            Activation::Identity => z.clone(),
        }
    }

    /// Multiplies `grad` in place by the activation derivative, given the
    /// pre-activation `z` and output `a`.
    fn backprop(self, grad: &mut DMatrix<f64>, z: &DMatrix<f64>, a: &DMatrix<f64>) {
        match self {
            Activation::Relu => grad.zip_apply(z, |g, z| {
                if z <= 0.0 {
                    *g = 0.0
                }
            }),
            Activation::Tanh => grad.zip_apply(a, |g, a| *g *= 1.0 - a * a),
            Activation::Identity => {}
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Tanh => 1,
            Activation::Identity => 2,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(Activation::Relu),
            1 => Some(Activation::Tanh),
            2 => Some(Activation::Identity),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `(out × in)`
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    pub layers: Vec<Layer>,
    pub hidden: Activation,
    pub output: Activation,
    version: u64,
}

/// Intermediate values of one forward pass, needed by `backward`.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    version: u64,
    /// Input to every layer; `inputs[0]` is the network input.
    inputs: Vec<DMatrix<f64>>,
    pre: Vec<DMatrix<f64>>,
    output: DMatrix<f64>,
}

impl ForwardCache {
    pub fn output(&self) -> &DMatrix<f64> {
        &self.output
    }
}

/// Parameter gradients in the same layout as `DenseNet::layers`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(l.bias.iter()).all(|v| v.is_finite()))
    }

    pub fn scale(&mut self, k: f64) {
        for l in &mut self.layers {
            l.weights *= k;
            l.bias *= k;
        }
    }
}

impl DenseNet {
    /// Random network with weights and biases uniform in `±1/√fan_in`.
    pub fn new<R: Rng>(sizes: &[usize], hidden: Activation, output: Activation, rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "a network needs input and output sizes");
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = 1.0 / (fan_in as f64).sqrt();
                Layer {
                    weights: DMatrix::from_fn(fan_out, fan_in, |_, _| rng.gen_range(-bound..bound)),
                    bias: DVector::from_fn(fan_out, |_, _| rng.gen_range(-bound..bound)),
                }
            })
            .collect();
        Self {
            layers,
            hidden,
            output,
            version: 0,
        }
    }

    pub fn from_layers(layers: Vec<Layer>, hidden: Activation, output: Activation) -> Self {
        Self {
            layers,
            hidden,
            output,
            version: 0,
        }
    }

    /// Scales the last layer's parameters, e.g. to start near zero output.
    pub fn scale_output_layer(&mut self, k: f64) {
        if let Some(last) = self.layers.last_mut() {
            last.weights *= k;
            last.bias *= k;
        }
        self.version += 1;
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.input_size()];
        s.extend(self.layers.iter().map(|l| l.weights.nrows()));
        s
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].weights.ncols()
    }

    pub fn output_size(&self) -> usize {
        self.layers.last().map(|l| l.weights.nrows()).unwrap_or(0)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Number of times the parameters have been modified.
    pub fn version(&self) -> u64 {
        self.version
    }

    fn activation(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            self.output
        } else {
            self.hidden
        }
    }

    fn check_input(&self, rows: usize) -> Result<(), NetError> {
        if rows != self.input_size() {
            return Err(NetError::SizeMismatch {
                expected: self.input_size(),
                got: rows,
            });
        }
        Ok(())
    }

    fn affine(layer: &Layer, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut z = &layer.weights * x;
        for mut col in z.column_iter_mut() {
            col += &layer.bias;
        }
        z
    }

    /// Forward pass over a batch without keeping intermediates.
    pub fn predict(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>, NetError> {
        self.check_input(x.nrows())?;
        let mut a = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            a = self.activation(i).apply(&Self::affine(layer, &a));
        }
        Ok(a)
    }

    pub fn predict_one(&self, x: &[f64]) -> Result<Vec<f64>, NetError> {
        let out = self.predict(&DMatrix::from_column_slice(x.len(), 1, x))?;
        Ok(out.as_slice().to_vec())
    }

    pub fn forward_batch(&self, x: &DMatrix<f64>) -> Result<ForwardCache, NetError> {
        self.check_input(x.nrows())?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut a = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = Self::affine(layer, &a);
            let next = self.activation(i).apply(&z);
            inputs.push(a);
            pre.push(z);
            a = next;
        }
        Ok(ForwardCache {
            version: self.version,
            inputs,
            pre,
            output: a,
        })
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, ForwardCache), NetError> {
        let cache = self.forward_batch(&DMatrix::from_column_slice(x.len(), 1, x))?;
        Ok((cache.output.as_slice().to_vec(), cache))
    }

    fn check_cache(&self, cache: &ForwardCache, out_grad: &DMatrix<f64>) -> Result<(), NetError> {
        if cache.version != self.version
            || cache.inputs.len() != self.layers.len()
            || cache.output.shape() != out_grad.shape()
        {
            return Err(NetError::StaleCache);
        }
        Ok(())
    }

    /// Gradients of `Σ output ⊙ out_grad` with respect to every parameter and
    /// to the input batch.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        out_grad: &DMatrix<f64>,
    ) -> Result<(Gradients, DMatrix<f64>), NetError> {
        self.check_cache(cache, out_grad)?;
        let n = self.layers.len();
        let mut grads: Vec<Layer> = Vec::with_capacity(n);
        let mut delta = out_grad.clone();
        for i in (0..n).rev() {
            let a = if i + 1 == n { &cache.output } else { &cache.inputs[i + 1] };
            self.activation(i).backprop(&mut delta, &cache.pre[i], a);
            let dw = &delta * cache.inputs[i].transpose();
            let db = delta.column_sum();
            let next = self.layers[i].weights.transpose() * &delta;
            grads.push(Layer { weights: dw, bias: db });
            delta = next;
        }
        grads.reverse();
        Ok((Gradients { layers: grads }, delta))
    }

    /// Gradient with respect to the input only.
    pub fn input_gradient(&self, cache: &ForwardCache, out_grad: &DMatrix<f64>) -> Result<DMatrix<f64>, NetError> {
        self.check_cache(cache, out_grad)?;
        let n = self.layers.len();
        let mut delta = out_grad.clone();
        for i in (0..n).rev() {
            let a = if i + 1 == n { &cache.output } else { &cache.inputs[i + 1] };
            self.activation(i).backprop(&mut delta, &cache.pre[i], a);
            delta = self.layers[i].weights.transpose() * &delta;
        }
        Ok(delta)
    }

    /// `self ← (1 − tau)·self + tau·online`.
    pub fn polyak_from(&mut self, online: &DenseNet, tau: f64) {
        if tau == 1.0 {
            for (t, o) in self.layers.iter_mut().zip(&online.layers) {
                t.weights.copy_from(&o.weights);
                t.bias.copy_from(&o.bias);
            }
        } else if tau != 0.0 {
            for (t, o) in self.layers.iter_mut().zip(&online.layers) {
                t.weights.zip_apply(&o.weights, |t, o| *t = (1.0 - tau) * *t + tau * o);
                t.bias.zip_apply(&o.bias, |t, o| *t = (1.0 - tau) * *t + tau * o);
            }
        }
        self.version += 1;
    }

    /// Parameters flattened layer by layer, weights column-major then bias.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(l.bias.as_slice());
        }
        out
    }

    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<(), NetError> {
        if params.len() != self.param_count() {
            return Err(NetError::SizeMismatch {
                expected: self.param_count(),
                got: params.len(),
            });
        }
        let mut off = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.as_mut_slice().copy_from_slice(&params[off..off + nw]);
            off += nw;
            let nb = l.bias.len();
            l.bias.as_mut_slice().copy_from_slice(&params[off..off + nb]);
            off += nb;
        }
        self.version += 1;
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(l.bias.iter()).all(|v| v.is_finite()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 3e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First/second moment accumulators for every parameter of one network.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub config: AdamConfig,
    pub step: u64,
    pub m: Vec<Layer>,
    pub v: Vec<Layer>,
}

impl OptimizerState {
    pub fn new(net: &DenseNet, config: AdamConfig) -> Self {
        let zeros = || {
            net.layers
                .iter()
                .map(|l| Layer {
                    weights: DMatrix::zeros(l.weights.nrows(), l.weights.ncols()),
                    bias: DVector::zeros(l.bias.len()),
                })
                .collect::<Vec<_>>()
        };
        Self {
            config,
            step: 0,
            m: zeros(),
            v: zeros(),
        }
    }

    /// Bias-corrected Adam update. Non-finite gradients leave both the
    /// parameters and the moments untouched.
    pub fn adam_step(&mut self, net: &mut DenseNet, grads: &Gradients) -> Result<(), NetError> {
        if !grads.is_finite() {
            return Err(NetError::NonFiniteGradient);
        }
        if grads.layers.len() != net.layers.len() {
            return Err(NetError::StaleCache);
        }
        let c = self.config;
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - c.beta1.powi(t);
        let bc2 = 1.0 - c.beta2.powi(t);
        let lr_t = c.learning_rate * bc2.sqrt() / bc1;
        let eps_t = c.epsilon * bc2.sqrt();
        let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
            for i in 0..p.len() {
                m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
                v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
                p[i] -= lr_t * m[i] / (v[i].sqrt() + eps_t);
            }
        };
        for (((p, g), m), v) in net
            .layers
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            update(
                p.weights.as_mut_slice(),
                g.weights.as_slice(),
                m.weights.as_mut_slice(),
                v.weights.as_mut_slice(),
            );
            update(
                p.bias.as_mut_slice(),
                g.bias.as_slice(),
                m.bias.as_mut_slice(),
                v.bias.as_mut_slice(),
            );
        }
        net.version += 1;
        Ok(())
    }

    pub fn flat_moments(&self) -> (Vec<f64>, Vec<f64>) {
        let flat = |ls: &[Layer]| {
            ls.iter()
                .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied().collect::<Vec<_>>())
                .collect::<Vec<_>>()
        };
        (flat(&self.m), flat(&self.v))
    }

    pub fn set_flat_moments(&mut self, m: &[f64], v: &[f64]) -> Result<(), NetError> {
        let count: usize = self.m.iter().map(|l| l.weights.len() + l.bias.len()).sum();
        if m.len() != count || v.len() != count {
            return Err(NetError::SizeMismatch {
                expected: count,
                got: m.len().min(v.len()),
            });
        }
        for (dst, src) in [(&mut self.m, m), (&mut self.v, v)] {
            let mut off = 0;
            for l in dst.iter_mut() {
                let nw = l.weights.len();
                l.weights.as_mut_slice().copy_from_slice(&src[off..off + nw]);
                off += nw;
                let nb = l.bias.len();
                l.bias.as_mut_slice().copy_from_slice(&src[off..off + nb]);
                off += nb;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zero_net(sizes: &[usize], out: Activation) -> DenseNet {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut net = DenseNet::new(sizes, Activation::Relu, out, &mut rng);
        net.set_flat_params(&vec![0.0; net.param_count()]).unwrap();
        net
    }

    #[test]
    fn zero_net_outputs_zero() {
        for out in [Activation::Tanh, Activation::Identity] {
            let net = zero_net(&[3, 5, 2], out);
            assert_eq!(net.predict_one(&[1.0, -2.0, 0.5]).unwrap(), vec![0.0, 0.0]);
        }
    }

    #[test]
    fn identity_layer_passes_input() {
        let layer = Layer {
            weights: DMatrix::identity(3, 3),
            bias: DVector::zeros(3),
        };
        let net = DenseNet::from_layers(vec![layer], Activation::Relu, Activation::Identity);
        assert_eq!(net.predict_one(&[1.5, -2.0, 0.25]).unwrap(), vec![1.5, -2.0, 0.25]);
    }

    #[test]
    fn hand_computed_one_two_one() {
        // h = relu([2x + 0.5, -x + 1]); y = tanh(0.3 h1 - 0.7 h2 + 0.1)
        let l1 = Layer {
            weights: DMatrix::from_row_slice(2, 1, &[2.0, -1.0]),
            bias: DVector::from_vec(vec![0.5, 1.0]),
        };
        let l2 = Layer {
            weights: DMatrix::from_row_slice(1, 2, &[0.3, -0.7]),
            bias: DVector::from_vec(vec![0.1]),
        };
        let net = DenseNet::from_layers(vec![l1, l2], Activation::Relu, Activation::Tanh);
        let x: f64 = 0.4;
        let h1 = (2.0 * x + 0.5f64).max(0.0);
        let h2 = (-x + 1.0f64).max(0.0);
        let expected = (0.3 * h1 - 0.7 * h2 + 0.1).tanh();
        let (out, _) = net.forward(&[x]).unwrap();
        assert!((out[0] - expected).abs() < 1e-12);
        // x = 2 turns off the second hidden unit
        let expected = (0.3 * 4.5 + 0.1f64).tanh();
        assert!((net.predict_one(&[2.0]).unwrap()[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn size_mismatch_is_reported() {
        let net = zero_net(&[3, 4, 1], Activation::Identity);
        assert_eq!(
            net.predict_one(&[1.0]),
            Err(NetError::SizeMismatch { expected: 3, got: 1 })
        );
    }

    #[test]
    fn zero_output_gradient_gives_zero_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = DenseNet::new(&[4, 6, 2], Activation::Relu, Activation::Tanh, &mut rng);
        let (_, cache) = net.forward(&[0.1, 0.2, -0.3, 0.4]).unwrap();
        let (g, dx) = net.backward(&cache, &DMatrix::zeros(2, 1)).unwrap();
        assert!(g.layers.iter().all(|l| l.weights.iter().all(|v| *v == 0.0)));
        assert!(dx.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn linear_input_gradient_is_transposed_weights() {
        let w = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, -1.0, 0.5, 4.0]);
        let net = DenseNet::from_layers(
            vec![Layer {
                weights: w.clone(),
                bias: DVector::zeros(2),
            }],
            Activation::Relu,
            Activation::Identity,
        );
        let (_, cache) = net.forward(&[0.3, 0.2, 0.1]).unwrap();
        let g = DMatrix::from_column_slice(2, 1, &[0.7, -1.3]);
        let (_, dx) = net.backward(&cache, &g).unwrap();
        assert_eq!(dx, w.transpose() * &g);
        assert_eq!(net.input_gradient(&cache, &g).unwrap(), dx);
    }

    #[test]
    fn stale_cache_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut net = DenseNet::new(&[2, 3, 1], Activation::Relu, Activation::Identity, &mut rng);
        let mut opt = OptimizerState::new(&net, AdamConfig::default());
        let (_, cache) = net.forward(&[1.0, 2.0]).unwrap();
        let (g, _) = net.backward(&cache, &DMatrix::from_element(1, 1, 1.0)).unwrap();
        opt.adam_step(&mut net, &g).unwrap();
        assert_eq!(
            net.backward(&cache, &DMatrix::from_element(1, 1, 1.0)).unwrap_err(),
            NetError::StaleCache
        );
    }

    #[test]
    fn adam_zero_gradient_leaves_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut net = DenseNet::new(&[2, 3, 1], Activation::Relu, Activation::Identity, &mut rng);
        let before = net.flat_params();
        let mut opt = OptimizerState::new(&net, AdamConfig::default());
        let zero = Gradients {
            layers: opt.m.clone(),
        };
        opt.adam_step(&mut net, &zero).unwrap();
        assert_eq!(net.flat_params(), before);
    }

    #[test]
    fn adam_first_step_moves_by_learning_rate() {
        let layer = Layer {
            weights: DMatrix::from_element(1, 1, 0.5),
            bias: DVector::zeros(1),
        };
        let mut net = DenseNet::from_layers(vec![layer], Activation::Relu, Activation::Identity);
        let mut opt = OptimizerState::new(&net, AdamConfig::default());
        let g = Gradients {
            layers: vec![Layer {
                weights: DMatrix::from_element(1, 1, 1.0),
                bias: DVector::zeros(1),
            }],
        };
        opt.adam_step(&mut net, &g).unwrap();
        // m̂ = 1, v̂ = 1, step = lr·1/(1 + 1e-8)
        let moved = 0.5 - net.layers[0].weights[(0, 0)];
        assert!((moved - 3e-4 / (1.0 + 1e-8)).abs() < 1e-15, "{moved}");
    }

    #[test]
    fn adam_rejects_non_finite() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut net = DenseNet::new(&[1, 1], Activation::Relu, Activation::Identity, &mut rng);
        let before = net.clone();
        let mut opt = OptimizerState::new(&net, AdamConfig::default());
        let mut g = Gradients { layers: opt.m.clone() };
        g.layers[0].weights[(0, 0)] = f64::NAN;
        assert_eq!(opt.adam_step(&mut net, &g), Err(NetError::NonFiniteGradient));
        assert_eq!(net, before);
        assert_eq!(opt.step, 0);
    }

    #[test]
    fn polyak_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let online = DenseNet::new(&[2, 3, 1], Activation::Relu, Activation::Identity, &mut rng);
        let mut target = DenseNet::new(&[2, 3, 1], Activation::Relu, Activation::Identity, &mut rng);
        let before = target.flat_params();
        target.polyak_from(&online, 0.0);
        assert_eq!(target.flat_params(), before);
        target.polyak_from(&online, 1.0);
        assert_eq!(target.flat_params(), online.flat_params());

        let mut t = DenseNet::from_layers(
            vec![Layer {
                weights: DMatrix::zeros(1, 1),
                bias: DVector::zeros(1),
            }],
            Activation::Relu,
            Activation::Identity,
        );
        let mut o = t.clone();
        o.set_flat_params(&[1.0, 1.0]).unwrap();
        t.polyak_from(&o, 0.005);
        assert_eq!(t.flat_params(), vec![0.005, 0.005]);
    }
}
