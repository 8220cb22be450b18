use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::GateObjective;
use crate::numeric::AdamConfig;

/// How gate parameters are initialized after pretraining.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateInit {
    /// `Uniform(-1/sqrt(n), 1/sqrt(n))` projection and bias.
    Uniform,
    /// All-zero projection and bias, every gate at probability 0.5.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Embedding width of every field in the base model.
    pub embed_dim: usize,
    pub mlp_hidden: Vec<usize>,
    pub batch_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub tau: f64,
    pub lambda: f64,
    /// Include the polarization term in the gate objective.
    pub polarize: bool,
    /// Multiplier on the polarization term; 1 reproduces the plain regularizer.
    pub polar_weight: f64,
    pub pretrain_epochs: usize,
    /// Gate update every this many training batches.
    pub val_every: usize,
    pub k: usize,
    pub seed: u64,
    /// Evaluations without validation AUC improvement before stopping.
    pub patience: usize,
    pub max_search_epochs: usize,
    pub max_retrain_epochs: usize,
    pub min_freq: usize,
    pub gate_init: GateInit,
    pub kmeans_max_epochs: usize,
    pub kmeans_tol: f64,
    /// A dimension is kept for a cluster when its mean mask reaches this value.
    pub majority: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            embed_dim: 16,
            mlp_hidden: vec![16, 8],
            batch_size: 2048,
            lr: 1e-3,
            weight_decay: 1e-6,
            tau: 0.1,
            lambda: 1e-3,
            polarize: true,
            polar_weight: 1.0,
            pretrain_epochs: 5,
            val_every: 100,
            k: 2,
            seed: 20_230_821,
            patience: 3,
            max_search_epochs: 50,
            max_retrain_epochs: 50,
            min_freq: 10,
            gate_init: GateInit::Uniform,
            kmeans_max_epochs: 100,
            kmeans_tol: 1e-4,
            majority: 0.5,
        }
    }
}

fn positive<T: PartialOrd + Default>(key: &str, v: T) -> Result<()> {
    if v > T::default() {
        Ok(())
    } else {
        Err(Error::config(key, "must be positive"))
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        positive("embed_dim", self.embed_dim)?;
        positive("batch_size", self.batch_size)?;
        positive("val_every", self.val_every)?;
        positive("patience", self.patience)?;
        positive("max_search_epochs", self.max_search_epochs)?;
        positive("max_retrain_epochs", self.max_retrain_epochs)?;
        positive("min_freq", self.min_freq)?;
        positive("kmeans_max_epochs", self.kmeans_max_epochs)?;
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::config("tau", "must be a positive finite number"));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::config("lr", "must be non-negative"));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::config("weight_decay", "must be non-negative"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::config("lambda", "must be non-negative"));
        }
        if !(self.polar_weight >= 0.0 && self.polar_weight.is_finite()) {
            return Err(Error::config("polar_weight", "must be non-negative"));
        }
        if self.k < 2 {
            return Err(Error::config("k", "must be at least 2"));
        }
        if self.mlp_hidden.contains(&0) {
            return Err(Error::config("mlp_hidden", "layer widths must be positive"));
        }
        if !(self.kmeans_tol > 0.0) {
            return Err(Error::config("kmeans_tol", "must be positive"));
        }
        if !(self.majority > 0.0 && self.majority <= 1.0) {
            return Err(Error::config("majority", "must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            weight_decay: self.weight_decay,
            ..AdamConfig::default()
        }
    }

    pub fn objective(&self) -> GateObjective {
        GateObjective {
            lambda: self.lambda,
            polarize: self.polarize,
            polar_weight: self.polar_weight,
        }
    }
}
