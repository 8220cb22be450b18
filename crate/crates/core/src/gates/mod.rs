//! Bernoulli gates over embedding dimensions.
//!
//! In stochastic mode each dimension's gate is drawn with the Gumbel-Max
//! trick, and gradients follow the temperature-`tau` Gumbel-Softmax
//! relaxation (straight-through). In deterministic mode a per-sample
//! threshold is searched on the histogram of gate probabilities and every
//! gate above it opens. A polarization term pushes probabilities away from
//! their per-sample mean so that the histogram separates into two lobes.

mod params;
mod polar;
mod select;

pub use params::{gate_gradients, gate_probs, gate_update_step, GateObjective, GateParams, GateProbs, GATE_PROB_CLAMP};
pub use polar::{find_threshold, has_saddle, polarization_reg, sparsity_reg, weighted_polarization_reg, DEFAULT_BINS};
pub use select::{deterministic_mask, st_gumbel, stochastic_mask, Mask, MaskMode, StochasticMask};
