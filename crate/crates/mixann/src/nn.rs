//! Minimal feed-forward network machinery: ReLU hidden layers, a linear
//! output, manual backpropagation over a flat parameter vector, and an
//! adaptive-moment (Adam) optimizer.
//!
//! Keeping all parameters in one flat `Vec<f64>` makes optimizer state,
//! target-network blending, finite-difference checks, and serialization
//! one-liners. Networks here are small (tens of thousands of parameters),
//! so per-sample loops are fast enough and easy to verify.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

/// Numerically stable logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy evaluated on a pre-sigmoid logit, in stable form.
pub fn bce_with_logit(logit: f64, target: f64) -> f64 {
    logit.max(0.0) - logit * target + (-logit.abs()).exp().ln_1p()
}

/// Gradient of [`bce_with_logit`] with respect to the logit.
pub fn bce_with_logit_grad(logit: f64, target: f64) -> f64 {
    sigmoid(logit) - target
}

/// Fully connected network with ReLU hidden activations and a linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    dims: Vec<usize>,
    params: Vec<f64>,
}

/// Intermediate activations retained for backpropagation.
pub struct ForwardCache {
    input: Vec<f64>,
    /// Pre-activation values per layer; the last entry is the network output.
    pre: Vec<Vec<f64>>,
    /// Post-activation values per hidden layer.
    post: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.pre.last().expect("network has at least one layer")
    }
}

fn param_len(dims: &[usize]) -> usize {
    dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl Mlp {
    /// Uniform fan-in initialization: every weight and bias of a layer with
    /// `fan_in` inputs is drawn from `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`.
    pub fn new(dims: &[usize], rng: &mut ChaCha8Rng) -> Self {
        assert!(dims.len() >= 2, "need at least input and output dims");
        let mut params = Vec::with_capacity(param_len(dims));
        for w in dims.windows(2) {
            let limit = 1.0 / (w[0] as f64).sqrt();
            let count = w[0] * w[1] + w[1];
            params.extend((0..count).map(|_| rng.random_range(-limit..limit)));
        }
        Self { dims: dims.to_vec(), params }
    }

    /// All-zero parameters; forward passes output zero for any input.
    pub fn zeros(dims: &[usize]) -> Self {
        assert!(dims.len() >= 2);
        Self {
            dims: dims.to_vec(),
            params: vec![0.0; param_len(dims)],
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::ShapeMismatch {
                left: self.params.len(),
                right: params.len(),
            });
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        Ok(())
    }

    /// Offset of layer `l`'s weights within the flat parameter vector.
    fn layer_offset(&self, layer: usize) -> usize {
        self.dims[..=layer]
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    /// Forward pass discarding intermediates.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut cache = self.forward_cached(input)?;
        Ok(cache.pre.pop().expect("network has at least one layer"))
    }

    /// Forward pass retaining everything [`Self::backward`] needs.
    pub fn forward_cached(&self, input: &[f64]) -> Result<ForwardCache> {
        self.check_input(input)?;
        let layers = self.dims.len() - 1;
        let mut pre: Vec<Vec<f64>> = Vec::with_capacity(layers);
        let mut post: Vec<Vec<f64>> = Vec::with_capacity(layers.saturating_sub(1));
        let mut current: &[f64] = input;
        let mut offset = 0;
        for layer in 0..layers {
            let (n_in, n_out) = (self.dims[layer], self.dims[layer + 1]);
            let weights = &self.params[offset..offset + n_in * n_out];
            let biases = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            let mut z = vec![0.0; n_out];
            for (o, zo) in z.iter_mut().enumerate() {
                let row = &weights[o * n_in..(o + 1) * n_in];
                *zo = biases[o] + row.iter().zip(current).map(|(w, x)| w * x).sum::<f64>();
            }
            offset += n_in * n_out + n_out;
            if layer + 1 < layers {
                post.push(z.iter().map(|&v| v.max(0.0)).collect());
                pre.push(z);
                current = post.last().unwrap().as_slice();
            } else {
                pre.push(z);
            }
        }
        Ok(ForwardCache {
            input: input.to_vec(),
            pre,
            post,
        })
    }

    /// Backpropagates `output_grad` (dL/d output) through the cached pass,
    /// accumulating parameter gradients into `param_grads` and returning the
    /// gradient with respect to the network input.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        output_grad: &[f64],
        param_grads: &mut [f64],
    ) -> Result<Vec<f64>> {
        if output_grad.len() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim(),
                got: output_grad.len(),
            });
        }
        if param_grads.len() != self.params.len() {
            return Err(Error::ShapeMismatch {
                left: self.params.len(),
                right: param_grads.len(),
            });
        }
        let layers = self.dims.len() - 1;
        let mut delta = output_grad.to_vec();
        for layer in (0..layers).rev() {
            let (n_in, n_out) = (self.dims[layer], self.dims[layer + 1]);
            let offset = self.layer_offset(layer);
            let input_act: &[f64] = if layer == 0 {
                &cache.input
            } else {
                &cache.post[layer - 1]
            };
            {
                let grads = &mut param_grads[offset..offset + n_in * n_out + n_out];
                let (weight_grads, bias_grads) = grads.split_at_mut(n_in * n_out);
                for (o, &d) in delta.iter().enumerate() {
                    bias_grads[o] += d;
                    let row = &mut weight_grads[o * n_in..(o + 1) * n_in];
                    for (g, &x) in row.iter_mut().zip(input_act) {
                        *g += d * x;
                    }
                }
            }
            let weights = &self.params[offset..offset + n_in * n_out];
            let mut input_grad = vec![0.0; n_in];
            for (o, &d) in delta.iter().enumerate() {
                let row = &weights[o * n_in..(o + 1) * n_in];
                for (g, &w) in input_grad.iter_mut().zip(row) {
                    *g += d * w;
                }
            }
            if layer > 0 {
                // Chain through the ReLU that produced this layer's input.
                for (g, &z) in input_grad.iter_mut().zip(&cache.pre[layer - 1]) {
                    if z <= 0.0 {
                        *g = 0.0;
                    }
                }
            }
            delta = input_grad;
        }
        Ok(delta)
    }
}

/// Adam state for one flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub learning_rate: f64,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
    step_count: u64,
}

impl Adam {
    pub fn new(learning_rate: f64, param_count: usize) -> Self {
        Self {
            learning_rate,
            first_moment: vec![0.0; param_count],
            second_moment: vec![0.0; param_count],
            step_count: 0,
        }
    }

    /// One bias-corrected update in place.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.first_moment.len() || grads.len() != params.len() {
            return Err(Error::ShapeMismatch {
                left: self.first_moment.len(),
                right: grads.len(),
            });
        }
        self.step_count += 1;
        let bias1 = 1.0 - ADAM_BETA1.powi(self.step_count as i32);
        let bias2 = 1.0 - ADAM_BETA2.powi(self.step_count as i32);
        for i in 0..params.len() {
            self.first_moment[i] = ADAM_BETA1 * self.first_moment[i] + (1.0 - ADAM_BETA1) * grads[i];
            self.second_moment[i] =
                ADAM_BETA2 * self.second_moment[i] + (1.0 - ADAM_BETA2) * grads[i] * grads[i];
            let m_hat = self.first_moment[i] / bias1;
            let v_hat = self.second_moment[i] / bias2;
            params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
        }
        Ok(())
    }
}

/// Blends `online` parameters into `target`: `t <- (1 - tau) * t + tau * o`.
pub fn soft_update(target: &mut Mlp, online: &Mlp, tau: f64) -> Result<()> {
    if target.params.len() != online.params.len() {
        return Err(Error::ShapeMismatch {
            left: target.params.len(),
            right: online.params.len(),
        });
    }
    for (t, &o) in target.params.iter_mut().zip(&online.params) {
        *t = (1.0 - tau) * *t + tau * o;
    }
    Ok(())
}
