use serde::{Deserialize, Serialize};

use super::params::GateProbs;
use super::polar::{find_threshold, DEFAULT_BINS};
use crate::numeric::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaskMode {
    Stochastic,
    Deterministic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mask {
    pub bits: Vec<bool>,
    pub mode: MaskMode,
}

impl Mask {
    pub fn all_open(n: usize) -> Self {
        Mask {
            bits: vec![true; n],
            mode: MaskMode::Deterministic,
        }
    }

    pub fn open_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// A hard mask plus, per gate, the straight-through derivative of the
/// relaxed first component with respect to `p` at the same noise draw.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMask {
    pub mask: Mask,
    pub dz_dp: Vec<f64>,
}

/// Straight-through Gumbel-Softmax for one Bernoulli gate with noise `(g, g2)`.
///
/// Returns the hard Gumbel-Max bit, the relaxed first component
/// `z = softmax([(ln p + g)/tau, (ln(1-p) + g2)/tau])[0]` and `dz/dp`.
pub fn st_gumbel(p: f64, g: f64, g2: f64, tau: f64) -> (bool, f64, f64) {
    let a = p.ln() + g;
    let b = (1.0 - p).ln() + g2;
    let hard = a > b;
    let z = crate::numeric::sigmoid((a - b) / tau);
    let dz_dp = z * (1.0 - z) / tau * (1.0 / p + 1.0 / (1.0 - p));
    (hard, z, dz_dp)
}

pub fn stochastic_mask(p: &GateProbs, tau: f64, rng: &mut RngStream) -> StochasticMask {
    assert!(tau > 0.0, "temperature must be positive");
    let mut bits = Vec::with_capacity(p.len());
    let mut dz_dp = Vec::with_capacity(p.len());
    for &pj in p.values() {
        let g = rng.gumbel();
        let g2 = rng.gumbel();
        let (h, _, d) = st_gumbel(pj, g, g2, tau);
        bits.push(h);
        dz_dp.push(d);
    }
    StochasticMask {
        mask: Mask {
            bits,
            mode: MaskMode::Stochastic,
        },
        dz_dp,
    }
}

/// Open exactly the gates whose probability is strictly above the searched threshold.
pub fn deterministic_mask(p: &GateProbs) -> Mask {
    let t = find_threshold(p.values(), DEFAULT_BINS);
    Mask {
        bits: p.values().iter().map(|&v| v > t).collect(),
        mode: MaskMode::Deterministic,
    }
}
