//! The deep recommendation model: embedding lookup, masking, MLP with
//! explicit backward pass, BCE training and evaluation metrics.

mod embedding;
mod metrics;
mod mlp;
mod model;

pub use embedding::{apply_mask, EmbeddingTables};
pub use metrics::{auc, bce_loss, logloss};
pub use mlp::{Layer, Mlp, MlpTrace};
pub use model::{ModelGrads, ModelRole, RecommenderModel};
