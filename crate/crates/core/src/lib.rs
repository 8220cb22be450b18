//! Instance-wise embedding-dimension search for click-through-rate models.
//!
//! A base recommender is trained while per-sample Bernoulli gates learn
//! which embedding dimensions each sample needs. Samples are then clustered
//! on their gated representations, and a compact model is retrained per
//! cluster with the field widths that cluster's members agree on.

pub mod cluster;
pub mod data;
pub mod error;
pub mod gates;
pub mod numeric;
pub mod pipeline;
pub mod recommender;

pub use error::{Error, Result};
