use std::fmt;

use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use crate::cluster::KMeansModel;
use crate::error::{Error, Result};
use crate::gates::GateParams;
use crate::recommender::RecommenderModel;

/// The last pipeline stage that completed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Pretrained,
    Searched,
    Clustered,
    Retrained,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Pretrained => "pretrained",
            Stage::Searched => "searched",
            Stage::Clustered => "clustered",
            Stage::Retrained => "retrained",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-cluster outcome of dimension derivation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterDims {
    /// Kept embedding width per field.
    pub widths: Vec<usize>,
    /// Mean deterministic mask over the cluster's members, per dimension.
    pub mean_mask: Vec<f64>,
    /// Kept dimensions as a flat mask over the base representation.
    pub selected: Vec<bool>,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub clusters: Vec<ClusterDims>,
}

impl ClusterSpec {
    pub fn k(&self) -> usize {
        self.clusters.len()
    }
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalEvent {
    pub stage: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster: Option<usize>,
    pub epoch: usize,
    pub train_loss: f64,
    pub val_logloss: f64,
    pub val_auc: Option<f64>,
    /// Fraction of dimensions open under deterministic validation masks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub open_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gate_steps: Option<u64>,
}

/// Everything the pipeline has produced so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineState {
    pub stage: Stage,
    pub config: PipelineConfig,
    pub vocab_sizes: Vec<usize>,
    pub base: RecommenderModel,
    pub gate: Option<GateParams>,
    pub kmeans: Option<KMeansModel>,
    pub spec: Option<ClusterSpec>,
    pub cluster_models: Vec<RecommenderModel>,
    pub log: Vec<EvalEvent>,
}

impl PipelineState {
    /// Fail unless the state has reached at least `needed`.
    pub fn require(&self, needed: Stage) -> Result<()> {
        if self.stage >= needed {
            Ok(())
        } else {
            Err(Error::StagePrecondition(format!(
                "requires a {needed} state, got {}",
                self.stage
            )))
        }
    }

    pub(crate) fn gate(&self) -> Result<&GateParams> {
        self.gate
            .as_ref()
            .ok_or_else(|| Error::StagePrecondition("state has no gate parameters".into()))
    }

    pub(crate) fn kmeans(&self) -> Result<&KMeansModel> {
        self.kmeans
            .as_ref()
            .ok_or_else(|| Error::StagePrecondition("state has no cluster centroids".into()))
    }

    pub(crate) fn cluster_spec(&self) -> Result<&ClusterSpec> {
        self.spec
            .as_ref()
            .ok_or_else(|| Error::StagePrecondition("state has no cluster dimensions".into()))
    }
}
