use serde::{Deserialize, Serialize};

use super::polar::{sparsity_reg, weighted_polarization_reg};
use super::select::stochastic_mask;
use crate::data::EncodedSample;
use crate::error::{Error, Result};
use crate::numeric::{adam_step, affine_forward, sigmoid, AdamConfig, AdamState, DenseMatrix, RngStream};
use crate::recommender::{apply_mask, RecommenderModel};

pub const GATE_PROB_CLAMP: f64 = 1e-6;

/// Square projection from the embedding representation to gate logits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    pub projection: DenseMatrix,
    pub bias: Vec<f64>,
    optim_projection: AdamState,
    optim_bias: AdamState,
}

impl GateParams {
    /// `Uniform(-1/sqrt(n), 1/sqrt(n))` projection and bias.
    pub fn uniform(n: usize, adam: AdamConfig, rng: &mut RngStream) -> Self {
        let bound = 1.0 / (n as f64).sqrt();
        let projection = DenseMatrix::uniform(n, n, bound, rng);
        let bias = (0..n).map(|_| (2.0 * rng.uniform() - 1.0) * bound).collect();
        Self::from_parts(projection, bias, adam)
    }

    /// All-zero projection and bias: every gate starts at probability 0.5.
    pub fn zeros(n: usize, adam: AdamConfig) -> Self {
        Self::from_parts(DenseMatrix::zeros(n, n), vec![0.0; n], adam)
    }

    pub fn from_parts(projection: DenseMatrix, bias: Vec<f64>, adam: AdamConfig) -> Self {
        let optim_projection = AdamState::new(projection.len(), adam);
        let optim_bias = AdamState::new(bias.len(), adam);
        GateParams {
            projection,
            bias,
            optim_projection,
            optim_bias,
        }
    }

    pub fn width(&self) -> usize {
        self.bias.len()
    }

    pub fn steps_taken(&self) -> u64 {
        self.optim_bias.step
    }
}

/// Per-dimension open probabilities, clamped into `[1e-6, 1 - 1e-6]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateProbs {
    values: Vec<f64>,
    /// `d p / d logit`; zero where the clamp is active.
    slopes: Vec<f64>,
}

impl GateProbs {
    /// Wrap raw probabilities (clamped) with the sigmoid slope `p (1 - p)`.
    pub fn from_values(values: Vec<f64>) -> Self {
        let values: Vec<f64> = values
            .into_iter()
            .map(|p| p.clamp(GATE_PROB_CLAMP, 1.0 - GATE_PROB_CLAMP))
            .collect();
        let slopes = values.iter().map(|p| p * (1.0 - p)).collect();
        GateProbs { values, slopes }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// `p = clamp(sigmoid(projection * e + bias))`.
pub fn gate_probs(e: &[f64], params: &GateParams) -> Result<GateProbs> {
    let logits = affine_forward(e, &params.projection, &params.bias)?;
    let mut values = Vec::with_capacity(logits.len());
    let mut slopes = Vec::with_capacity(logits.len());
    for z in logits {
        let p = sigmoid(z);
        if !(GATE_PROB_CLAMP..=1.0 - GATE_PROB_CLAMP).contains(&p) {
            values.push(p.clamp(GATE_PROB_CLAMP, 1.0 - GATE_PROB_CLAMP));
            slopes.push(0.0);
        } else {
            values.push(p);
            slopes.push(p * (1.0 - p));
        }
    }
    Ok(GateProbs { values, slopes })
}

/// Regularization applied to gate probabilities on validation batches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateObjective {
    /// Weight of the expected-l0 term `sum_j p_j`.
    pub lambda: f64,
    /// Include the `-sum_j |p_j - mean(p)|` polarization term.
    pub polarize: bool,
    /// Multiplier on the polarization term.
    #[serde(default = "unit")]
    pub polar_weight: f64,
}

fn unit() -> f64 {
    1.0
}

impl GateObjective {
    pub fn regularizer(&self, p: &[f64]) -> (f64, Vec<f64>) {
        if self.polarize {
            weighted_polarization_reg(p, self.lambda, self.polar_weight)
        } else {
            sparsity_reg(p, self.lambda)
        }
    }
}

/// Gradients of the gate objective on one batch at the noise drawn from `rng`.
pub fn gate_gradients(
    gate: &GateParams,
    batch: &[&EncodedSample],
    base: &RecommenderModel,
    tau: f64,
    objective: GateObjective,
    rng: &mut RngStream,
) -> Result<(f64, DenseMatrix, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::EmptyDataset("empty validation batch".into()));
    }
    let n = gate.width();
    let scale = 1.0 / batch.len() as f64;
    let mut grad_w = DenseMatrix::zeros(n, n);
    let mut grad_b = vec![0.0; n];
    let mut total = 0.0;
    for s in batch {
        let e = base.represent(s)?;
        let p = gate_probs(&e, gate)?;
        let st = stochastic_mask(&p, tau, rng);
        let x = apply_mask(&e, &st.mask.bits)?;
        let (bce, _, gx) = base.input_gradient(&x, s.y())?;
        let (reg, reg_grad) = objective.regularizer(p.values());
        total += bce + reg;
        let dlogit: Vec<f64> = (0..n)
            .map(|j| {
                let d_mask = gx[j] * e[j];
                (d_mask * st.dz_dp[j] + reg_grad[j]) * p.slopes()[j] * scale
            })
            .collect();
        grad_w.add_outer(&dlogit, &e, 1.0);
        for (b, d) in grad_b.iter_mut().zip(&dlogit) {
            *b += d;
        }
    }
    let loss = total * scale;
    if !loss.is_finite() {
        return Err(Error::Numeric("gate objective".into()));
    }
    Ok((loss, grad_w, grad_b))
}

/// One Adam step on the gate parameters against a frozen base model.
///
/// The objective is mean BCE through straight-through stochastic masks plus
/// the mean per-sample regularizer. Returns the pre-step objective.
pub fn gate_update_step(
    gate: &mut GateParams,
    batch: &[&EncodedSample],
    base: &RecommenderModel,
    tau: f64,
    objective: GateObjective,
    rng: &mut RngStream,
) -> Result<f64> {
    let (loss, gw, gb) = gate_gradients(gate, batch, base, tau, objective, rng)?;
    adam_step("gate.projection", gate.projection.values_mut(), gw.values(), &mut gate.optim_projection)?;
    adam_step("gate.bias", &mut gate.bias, &gb, &mut gate.optim_bias)?;
    Ok(loss)
}
