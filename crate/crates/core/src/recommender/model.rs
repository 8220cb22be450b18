use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::embedding::{apply_mask, EmbeddingTables};
use super::metrics::bce_loss;
use super::mlp::Mlp;
use crate::data::EncodedSample;
use crate::error::{Error, Result};
use crate::numeric::{adam_step, AdamConfig, AdamState, DenseMatrix, RngStream};

/// Which of the pipeline's models this is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelRole {
    Base,
    Cluster(usize),
}

/// Gradients of the mean batch loss. Embedding gradients are sparse: only
/// rows referenced by the batch appear.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrads {
    pub layers: Vec<(DenseMatrix, Vec<f64>)>,
    pub tables: Vec<BTreeMap<usize, Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LayerOptim {
    weights: AdamState,
    bias: AdamState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommenderModel {
    pub role: ModelRole,
    pub tables: EmbeddingTables,
    pub mlp: Mlp,
    table_optim: Vec<AdamState>,
    layer_optim: Vec<LayerOptim>,
}

impl RecommenderModel {
    pub fn new(
        role: ModelRole,
        vocab_sizes: &[usize],
        widths: &[usize],
        hidden: &[usize],
        adam: AdamConfig,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let tables = EmbeddingTables::new(vocab_sizes, widths, rng)?;
        let input = tables.total_width();
        if input == 0 {
            return Err(Error::Pipeline("model with no embedding dimensions".into()));
        }
        let mlp = Mlp::new(input, hidden, rng);
        Ok(Self::assemble(role, tables, mlp, adam))
    }

    pub fn assemble(role: ModelRole, tables: EmbeddingTables, mlp: Mlp, adam: AdamConfig) -> Self {
        let table_optim = tables
            .tables()
            .iter()
            .map(|t| AdamState::new(t.len(), adam))
            .collect();
        let layer_optim = mlp
            .layers
            .iter()
            .map(|l| LayerOptim {
                weights: AdamState::new(l.weights.len(), adam),
                bias: AdamState::new(l.bias.len(), adam),
            })
            .collect();
        RecommenderModel {
            role,
            tables,
            mlp,
            table_optim,
            layer_optim,
        }
    }

    pub fn widths(&self) -> Vec<usize> {
        self.tables.widths()
    }

    pub fn input_width(&self) -> usize {
        self.tables.total_width()
    }

    pub fn embedding_param_count(&self) -> usize {
        self.tables.param_count()
    }

    pub fn param_count(&self) -> usize {
        self.tables.param_count() + self.mlp.param_count()
    }

    /// Concatenated embedding representation of a sample.
    pub fn represent(&self, sample: &EncodedSample) -> Result<Vec<f64>> {
        self.tables.lookup(sample)
    }

    pub fn predict_representation(&self, x: &[f64]) -> Result<f64> {
        self.mlp.forward(x)
    }

    pub fn predict(&self, sample: &EncodedSample, mask: Option<&[bool]>) -> Result<f64> {
        let e = self.represent(sample)?;
        match mask {
            Some(m) => self.mlp.forward(&apply_mask(&e, m)?),
            None => self.mlp.forward(&e),
        }
    }

    /// BCE loss, prediction and `d loss / d x` for a (masked) representation,
    /// without touching any parameter.
    pub fn input_gradient(&self, x: &[f64], y: f64) -> Result<(f64, f64, Vec<f64>)> {
        let trace = self.mlp.forward_trace(x)?;
        let loss = bce_loss(trace.prob, y);
        let grads = self.mlp.backward(&trace, trace.prob - y)?;
        Ok((loss, trace.prob, grads[0].input.clone()))
    }

    pub fn mean_loss(&self, batch: &[&EncodedSample], masks: Option<&[Vec<bool>]>) -> Result<f64> {
        let mut total = 0.0;
        for (i, s) in batch.iter().enumerate() {
            let p = self.predict(s, masks.map(|m| m[i].as_slice()))?;
            total += bce_loss(p, s.y());
        }
        Ok(total / batch.len() as f64)
    }

    /// Mean BCE over the batch and its gradients. Masks are treated as constants.
    pub fn gradients(
        &self,
        batch: &[&EncodedSample],
        masks: Option<&[Vec<bool>]>,
    ) -> Result<(f64, ModelGrads)> {
        if batch.is_empty() {
            return Err(Error::EmptyDataset("empty training batch".into()));
        }
        if let Some(m) = masks {
            if m.len() != batch.len() {
                return Err(Error::shape("train_step masks", batch.len(), m.len()));
            }
        }
        let scale = 1.0 / batch.len() as f64;
        let widths = self.tables.widths();
        let mut layers: Vec<(DenseMatrix, Vec<f64>)> = self
            .mlp
            .layers
            .iter()
            .map(|l| (DenseMatrix::zeros(l.weights.rows(), l.weights.cols()), vec![0.0; l.bias.len()]))
            .collect();
        let mut tables: Vec<BTreeMap<usize, Vec<f64>>> = vec![BTreeMap::new(); widths.len()];
        let mut total = 0.0;
        for (i, s) in batch.iter().enumerate() {
            let e = self.represent(s)?;
            let mask = masks.map(|m| m[i].as_slice());
            let x = match mask {
                Some(m) => apply_mask(&e, m)?,
                None => e,
            };
            let trace = self.mlp.forward_trace(&x)?;
            let y = s.y();
            total += bce_loss(trace.prob, y);
            let lg = self.mlp.backward(&trace, (trace.prob - y) * scale)?;
            for ((gw, gb), g) in layers.iter_mut().zip(&lg) {
                for (a, b) in gw.values_mut().iter_mut().zip(g.weights.values()) {
                    *a += b;
                }
                for (a, b) in gb.iter_mut().zip(&g.bias) {
                    *a += b;
                }
            }
            let gx = &lg[0].input;
            let mut offset = 0;
            for (f, &w) in widths.iter().enumerate() {
                if w > 0 {
                    let row = tables[f].entry(s.fields[f]).or_insert_with(|| vec![0.0; w]);
                    for k in 0..w {
                        let open = mask.is_none_or(|m| m[offset + k]);
                        if open {
                            row[k] += gx[offset + k];
                        }
                    }
                }
                offset += w;
            }
        }
        let loss = total * scale;
        if !loss.is_finite() {
            return Err(Error::Numeric("training loss".into()));
        }
        Ok((loss, ModelGrads { layers, tables }))
    }

    pub fn apply_gradients(&mut self, grads: &ModelGrads) -> Result<()> {
        for (i, ((gw, gb), (layer, opt))) in grads
            .layers
            .iter()
            .zip(self.mlp.layers.iter_mut().zip(self.layer_optim.iter_mut()))
            .enumerate()
        {
            adam_step(&format!("mlp.{i}.weights"), layer.weights.values_mut(), gw.values(), &mut opt.weights)?;
            adam_step(&format!("mlp.{i}.bias"), &mut layer.bias, gb, &mut opt.bias)?;
        }
        for (f, rows) in grads.tables.iter().enumerate() {
            let table = self.tables.table_mut(f);
            let w = table.cols();
            if w == 0 {
                continue;
            }
            let touched: Vec<(usize, &[f64])> = rows.iter().map(|(&r, g)| (r, g.as_slice())).collect();
            self.table_optim[f].step_rows(&format!("embedding.{f}"), table.values_mut(), w, &touched)?;
        }
        Ok(())
    }

    /// One Adam step on the mean BCE of the batch; returns the pre-step loss.
    pub fn train_step(&mut self, batch: &[&EncodedSample], masks: Option<&[Vec<bool>]>) -> Result<f64> {
        let (loss, grads) = self.gradients(batch, masks)?;
        self.apply_gradients(&grads)?;
        Ok(loss)
    }
}
