use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::search::score_split;
use super::stages::{masked_representation, route};
use super::state::{PipelineState, Stage};
use crate::data::EncodedSample;
use crate::error::{Error, Result};

/// Click probability for one sample under the furthest-trained models in `state`.
///
/// A retrained state routes the sample to its cluster model. Searched and
/// clustered states score with the base model under the deterministic mask.
pub fn predict(state: &PipelineState, sample: &EncodedSample) -> Result<f64> {
    match state.stage {
        Stage::Pretrained => state.base.predict(sample, None),
        Stage::Searched | Stage::Clustered => state
            .base
            .predict_representation(&masked_representation(state, sample)?),
        Stage::Retrained => {
            let c = route(state, sample)?;
            let model = state
                .cluster_models
                .get(c)
                .ok_or_else(|| Error::Pipeline(format!("no model for cluster {c}")))?;
            model.predict(sample, None)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub stage: Stage,
    pub samples: usize,
    pub auc: Option<f64>,
    pub logloss: f64,
    /// Test samples routed to each cluster; empty before clustering.
    pub cluster_sizes: Vec<usize>,
    /// Kept width per field for each cluster; empty before clustering.
    pub dims: Vec<Vec<usize>>,
    pub embedding_params: usize,
    pub warnings: Vec<String>,
}

pub fn evaluate(state: &PipelineState, test: &[EncodedSample]) -> Result<MetricsReport> {
    if test.is_empty() {
        return Err(Error::EmptyDataset("test split is empty".into()));
    }
    let (logloss, auc) = score_split(test, |s| predict(state, s))?;
    let mut warnings = Vec::new();
    if auc.is_none() {
        warnings.push("test set has a single class; AUC omitted".to_string());
    }
    let mut cluster_sizes = Vec::new();
    let mut dims = Vec::new();
    if state.stage >= Stage::Clustered {
        let spec = state.cluster_spec()?;
        cluster_sizes = vec![0; spec.k()];
        for s in test {
            cluster_sizes[route(state, s)?] += 1;
        }
        dims = spec.clusters.iter().map(|c| c.widths.clone()).collect();
    }
    let embedding_params = if state.stage == Stage::Retrained {
        state.cluster_models.iter().map(|m| m.embedding_param_count()).sum()
    } else {
        state.base.embedding_param_count()
    };
    Ok(MetricsReport {
        stage: state.stage,
        samples: test.len(),
        auc,
        logloss,
        cluster_sizes,
        dims,
        embedding_params,
        warnings,
    })
}

impl MetricsReport {
    /// `key = value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "stage = {}", self.stage);
        let _ = writeln!(out, "samples = {}", self.samples);
        match self.auc {
            Some(a) => {
                let _ = writeln!(out, "auc = {a:.6}");
            }
            None => {
                let _ = writeln!(out, "auc = n/a");
            }
        }
        let _ = writeln!(out, "logloss = {:.6}", self.logloss);
        let _ = writeln!(out, "embedding_params = {}", self.embedding_params);
        for (c, (size, dims)) in self.cluster_sizes.iter().zip(&self.dims).enumerate() {
            let total: usize = dims.iter().sum();
            let _ = writeln!(out, "cluster.{c}.size = {size}");
            let _ = writeln!(out, "cluster.{c}.total_dims = {total}");
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning = {w}");
        }
        out
    }

    /// One row per field, one column per cluster.
    pub fn dims_csv(&self, field_names: &[String]) -> String {
        let mut out = String::from("field");
        for c in 0..self.dims.len() {
            let _ = write!(out, ",cluster_{c}");
        }
        out.push('\n');
        for (f, name) in field_names.iter().enumerate() {
            out.push_str(name);
            for d in &self.dims {
                let _ = write!(out, ",{}", d.get(f).copied().unwrap_or(0));
            }
            out.push('\n');
        }
        out
    }
}
