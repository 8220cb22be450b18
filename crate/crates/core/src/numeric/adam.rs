use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Optimizer hyperparameters shared by every tensor of a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 1e-6,
        }
    }
}

/// Per-tensor Adam state. Weight decay is an L2 term folded into the
/// gradient before the moment updates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub step: u64,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub config: AdamConfig,
}

impl AdamState {
    pub fn new(len: usize, config: AdamConfig) -> Self {
        AdamState {
            step: 0,
            first_moment: vec![0.0; len],
            second_moment: vec![0.0; len],
            config,
        }
    }

    pub fn len(&self) -> usize {
        self.first_moment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first_moment.is_empty()
    }

    /// Sparse update over row blocks of width `row_len`. The step counter
    /// advances once; only the listed rows have their moments or values touched.
    pub fn step_rows(
        &mut self,
        name: &str,
        param: &mut [f64],
        row_len: usize,
        rows: &[(usize, &[f64])],
    ) -> Result<()> {
        if param.len() != self.len() {
            return Err(Error::shape("AdamState::step_rows", self.len(), param.len()));
        }
        for (_, g) in rows {
            if g.len() != row_len {
                return Err(Error::shape("AdamState::step_rows row", row_len, g.len()));
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!("gradient of {name}")));
            }
        }
        self.step += 1;
        let c = self.config;
        let (bc1, bc2) = bias_corrections(&c, self.step);
        for &(r, g) in rows {
            let base = r * row_len;
            for (k, &gk) in g.iter().enumerate() {
                let i = base + k;
                update(
                    &c,
                    bc1,
                    bc2,
                    &mut param[i],
                    gk,
                    &mut self.first_moment[i],
                    &mut self.second_moment[i],
                );
            }
        }
        Ok(())
    }
}

fn bias_corrections(c: &AdamConfig, step: u64) -> (f64, f64) {
    let t = step as i32;
    (1.0 - c.beta1.powi(t), 1.0 - c.beta2.powi(t))
}

#[inline]
fn update(c: &AdamConfig, bc1: f64, bc2: f64, p: &mut f64, g: f64, m: &mut f64, v: &mut f64) {
    let g = g + c.weight_decay * *p;
    *m = c.beta1 * *m + (1.0 - c.beta1) * g;
    *v = c.beta2 * *v + (1.0 - c.beta2) * g * g;
    let m_hat = *m / bc1;
    let v_hat = *v / bc2;
    *p -= c.lr * m_hat / (v_hat.sqrt() + c.eps);
}

/// One dense Adam step on `param`. `name` labels the tensor in error messages.
pub fn adam_step(name: &str, param: &mut [f64], grad: &[f64], state: &mut AdamState) -> Result<()> {
    if param.len() != grad.len() {
        return Err(Error::shape("adam_step grad", param.len(), grad.len()));
    }
    if state.len() != param.len() {
        return Err(Error::shape("adam_step state", param.len(), state.len()));
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numeric(format!("gradient of {name}")));
    }
    state.step += 1;
    let c = state.config;
    let (bc1, bc2) = bias_corrections(&c, state.step);
    for i in 0..param.len() {
        update(
            &c,
            bc1,
            bc2,
            &mut param[i],
            grad[i],
            &mut state.first_moment[i],
            &mut state.second_moment[i],
        );
    }
    Ok(())
}
