use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::RngStream;

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::shape("DenseMatrix::from_vec", rows * cols, values.len()));
        }
        Ok(DenseMatrix { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::shape("DenseMatrix::from_rows", cols, r.len()));
            }
            values.extend_from_slice(r);
        }
        Ok(DenseMatrix {
            rows: rows.len(),
            cols,
            values,
        })
    }

    /// Entries drawn from `Uniform(-bound, bound)`.
    pub fn uniform(rows: usize, cols: usize, bound: f64, rng: &mut RngStream) -> Self {
        let values = (0..rows * cols)
            .map(|_| (2.0 * rng.uniform() - 1.0) * bound)
            .collect();
        DenseMatrix { rows, cols, values }
    }

    /// Entries drawn from `Normal(0, std)`.
    pub fn normal(rows: usize, cols: usize, std: f64, rng: &mut RngStream) -> Self {
        let values = (0..rows * cols).map(|_| rng.normal() * std).collect();
        DenseMatrix { rows, cols, values }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.values[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `self += scale * u v^T`, the accumulation shape of an affine weight gradient.
    pub fn add_outer(&mut self, u: &[f64], v: &[f64], scale: f64) {
        debug_assert_eq!(u.len(), self.rows);
        debug_assert_eq!(v.len(), self.cols);
        for (r, &ur) in u.iter().enumerate() {
            let a = ur * scale;
            if a == 0.0 {
                continue;
            }
            for (w, &vc) in self.row_mut(r).iter_mut().zip(v) {
                *w += a * vc;
            }
        }
    }

    /// `W^T g` without materializing the transpose.
    pub fn transpose_mul(&self, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (r, &gr) in g.iter().enumerate() {
            if gr == 0.0 {
                continue;
            }
            for (o, &w) in out.iter_mut().zip(self.row(r)) {
                *o += w * gr;
            }
        }
        out
    }
}

/// `output[r] = sum_c weights[r, c] * input[c] + bias[r]`.
pub fn affine_forward(input: &[f64], weights: &DenseMatrix, bias: &[f64]) -> Result<Vec<f64>> {
    if input.len() != weights.cols {
        return Err(Error::shape("affine_forward input", weights.cols, input.len()));
    }
    if bias.len() != weights.rows {
        return Err(Error::shape("affine_forward bias", weights.rows, bias.len()));
    }
    Ok((0..weights.rows)
        .map(|r| {
            weights
                .row(r)
                .iter()
                .zip(input)
                .fold(0.0, |acc, (w, x)| acc + w * x)
                + bias[r]
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineGrads {
    pub weights: DenseMatrix,
    pub bias: Vec<f64>,
    pub input: Vec<f64>,
}

pub fn affine_backward(
    upstream: &[f64],
    cached_input: &[f64],
    weights: &DenseMatrix,
) -> Result<AffineGrads> {
    if upstream.len() != weights.rows {
        return Err(Error::shape("affine_backward upstream", weights.rows, upstream.len()));
    }
    if cached_input.len() != weights.cols {
        return Err(Error::shape("affine_backward input", weights.cols, cached_input.len()));
    }
    let mut gw = DenseMatrix::zeros(weights.rows, weights.cols);
    gw.add_outer(upstream, cached_input, 1.0);
    Ok(AffineGrads {
        weights: gw,
        bias: upstream.to_vec(),
        input: weights.transpose_mul(upstream),
    })
}
