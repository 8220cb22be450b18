use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{affine_backward, affine_forward, sigmoid, AffineGrads, DenseMatrix, RngStream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: DenseMatrix,
    pub bias: Vec<f64>,
}

impl Layer {
    /// `Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in))` weights and biases.
    pub fn init(fan_in: usize, fan_out: usize, rng: &mut RngStream) -> Self {
        let bound = if fan_in == 0 { 0.0 } else { 1.0 / (fan_in as f64).sqrt() };
        let weights = DenseMatrix::uniform(fan_out, fan_in, bound, rng);
        let bias = (0..fan_out).map(|_| (2.0 * rng.uniform() - 1.0) * bound).collect();
        Layer { weights, bias }
    }

    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Layer {
            weights: DenseMatrix::zeros(fan_out, fan_in),
            bias: vec![0.0; fan_out],
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

/// ReLU hidden layers followed by a scalar sigmoid head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

/// Intermediate values of one forward pass, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct MlpTrace {
    /// Input to each layer (post-activation of the previous one).
    pub inputs: Vec<Vec<f64>>,
    /// Pre-activation output of each layer.
    pub pre: Vec<Vec<f64>>,
    pub prob: f64,
}

impl MlpTrace {
    pub fn logit(&self) -> f64 {
        self.pre.last().expect("non-empty mlp")[0]
    }
}

impl Mlp {
    pub fn new(input_width: usize, hidden: &[usize], rng: &mut RngStream) -> Self {
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut fan_in = input_width;
        for &h in hidden {
            layers.push(Layer::init(fan_in, h, rng));
            fan_in = h;
        }
        layers.push(Layer::init(fan_in, 1, rng));
        Mlp { layers }
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].weights.cols()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    pub fn forward_trace(&self, x: &[f64]) -> Result<MlpTrace> {
        if x.len() != self.input_width() {
            return Err(Error::shape("mlp input", self.input_width(), x.len()));
        }
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut h = x.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = affine_forward(&h, &layer.weights, &layer.bias)?;
            inputs.push(h);
            h = if i < last {
                z.iter().map(|v| v.max(0.0)).collect()
            } else {
                Vec::new()
            };
            pre.push(z);
        }
        let prob = sigmoid(pre[last][0]);
        Ok(MlpTrace { inputs, pre, prob })
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        Ok(self.forward_trace(x)?.prob)
    }

    /// Back-propagate `d loss / d logit`; returns per-layer gradients, the last
    /// entry's `input` field being the gradient with respect to `x`.
    pub fn backward(&self, trace: &MlpTrace, dlogit: f64) -> Result<Vec<AffineGrads>> {
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut upstream = vec![dlogit];
        for i in (0..self.layers.len()).rev() {
            let g = affine_backward(&upstream, &trace.inputs[i], &self.layers[i].weights)?;
            if i > 0 {
                // ReLU of the previous layer's pre-activation.
                upstream = g
                    .input
                    .iter()
                    .zip(&trace.pre[i - 1])
                    .map(|(&d, &z)| if z > 0.0 { d } else { 0.0 })
                    .collect();
            }
            grads.push(g);
        }
        grads.reverse();
        Ok(grads)
    }
}
