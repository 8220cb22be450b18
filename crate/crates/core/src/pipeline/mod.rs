//! The three-stage search / cluster / retrain pipeline, routed inference,
//! evaluation reports and checkpoints.

mod checkpoint;
mod config;
mod dataset;
mod report;
mod search;
mod stages;
mod state;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_MAGIC};
pub use config::{GateInit, PipelineConfig};
pub use dataset::EncodedDataset;
pub use report::{evaluate, predict, MetricsReport};
pub use search::{pretrain_stage, search_from_pretrained, search_stage, SearchRunner};
pub use stages::{cluster_stage, derive_cluster_dims, masked_representation, retrain_stage, route, train_full_model};
pub use state::{ClusterDims, ClusterSpec, EvalEvent, PipelineState, Stage};

use crate::data::EncodedSample;
use crate::numeric::RngStream;

/// Stream tags for the per-stage random streams derived from the run seed.
pub(crate) mod stream {
    pub const BASE_INIT: u64 = 1;
    pub const PRETRAIN: u64 = 2;
    pub const GATE_INIT: u64 = 3;
    pub const SEARCH: u64 = 4;
    pub const CLUSTER: u64 = 5;
    pub const RETRAIN: u64 = 6;
    pub const REFERENCE: u64 = 7;
}

/// Shuffled mini-batches of indices for one epoch.
pub(crate) fn epoch_batches(n: usize, batch_size: usize, rng: &mut RngStream) -> Vec<Vec<usize>> {
    let order = rng.permutation(n);
    order.chunks(batch_size.max(1)).map(<[usize]>::to_vec).collect()
}

pub(crate) fn gather<'a>(samples: &'a [EncodedSample], idx: &[usize]) -> Vec<&'a EncodedSample> {
    idx.iter().map(|&i| &samples[i]).collect()
}
