//! Dense numeric substrate: row-major matrices, affine layers with explicit
//! backward passes, Adam, seeded sampling and a finite-difference checker.

mod adam;
mod gradcheck;
mod matrix;
mod rng;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use gradcheck::finite_diff_check;
pub use matrix::{affine_backward, affine_forward, AffineGrads, DenseMatrix};
pub use rng::{sample_gumbel, RngStream};

/// Logistic sigmoid, evaluated in the numerically stable branch for each sign.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
