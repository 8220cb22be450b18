use serde::{Deserialize, Serialize};

use crate::data::EncodedSample;
use crate::error::{Error, Result};
use crate::numeric::{DenseMatrix, RngStream};

/// Per-field embedding tables.
///
/// Table `n` is stored category-major (`|n|` rows of width `d_n`), so the
/// embedding of category `c` is row `c`. A width of zero drops the field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTables {
    tables: Vec<DenseMatrix>,
}

impl EmbeddingTables {
    /// Entries drawn from `Normal(0, 0.01)`.
    pub fn new(vocab_sizes: &[usize], widths: &[usize], rng: &mut RngStream) -> Result<Self> {
        if vocab_sizes.len() != widths.len() {
            return Err(Error::shape("EmbeddingTables::new", vocab_sizes.len(), widths.len()));
        }
        let tables = vocab_sizes
            .iter()
            .zip(widths)
            .map(|(&v, &d)| DenseMatrix::normal(v, d, 0.01, rng))
            .collect();
        Ok(EmbeddingTables { tables })
    }

    pub fn from_tables(tables: Vec<DenseMatrix>) -> Self {
        EmbeddingTables { tables }
    }

    pub fn num_fields(&self) -> usize {
        self.tables.len()
    }

    pub fn widths(&self) -> Vec<usize> {
        self.tables.iter().map(DenseMatrix::cols).collect()
    }

    pub fn vocab_sizes(&self) -> Vec<usize> {
        self.tables.iter().map(DenseMatrix::rows).collect()
    }

    /// Length of the concatenated representation.
    pub fn total_width(&self) -> usize {
        self.tables.iter().map(DenseMatrix::cols).sum()
    }

    pub fn param_count(&self) -> usize {
        self.tables.iter().map(DenseMatrix::len).sum()
    }

    pub fn table(&self, field: usize) -> &DenseMatrix {
        &self.tables[field]
    }

    pub fn table_mut(&mut self, field: usize) -> &mut DenseMatrix {
        &mut self.tables[field]
    }

    pub fn tables(&self) -> &[DenseMatrix] {
        &self.tables
    }

    /// Concatenation of each field's embedding for this sample.
    pub fn lookup(&self, sample: &EncodedSample) -> Result<Vec<f64>> {
        if sample.fields.len() != self.tables.len() {
            return Err(Error::shape("embed_lookup fields", self.tables.len(), sample.fields.len()));
        }
        let mut out = Vec::with_capacity(self.total_width());
        for (f, (table, &idx)) in self.tables.iter().zip(&sample.fields).enumerate() {
            if idx >= table.rows() {
                return Err(Error::Lookup {
                    field: f,
                    index: idx,
                    size: table.rows(),
                });
            }
            out.extend_from_slice(table.row(idx));
        }
        Ok(out)
    }
}

/// Elementwise product of a representation with a binary mask.
pub fn apply_mask(e: &[f64], mask: &[bool]) -> Result<Vec<f64>> {
    if e.len() != mask.len() {
        return Err(Error::shape("apply_mask", e.len(), mask.len()));
    }
    Ok(e
        .iter()
        .zip(mask)
        .map(|(&v, &m)| if m { v } else { 0.0 })
        .collect())
}
