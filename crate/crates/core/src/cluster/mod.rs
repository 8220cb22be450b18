//! Mini-batch K-means over gated embedding representations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub centroids: Vec<Vec<f64>>,
    /// Points absorbed per centroid; the step size of the next update is `1 / (count + 1)`.
    pub counts: Vec<u64>,
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl KMeansModel {
    pub fn new(centroids: Vec<Vec<f64>>) -> Self {
        let counts = vec![0; centroids.len()];
        KMeansModel { centroids, counts }
    }

    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn dim(&self) -> usize {
        self.centroids.first().map_or(0, Vec::len)
    }

    /// Nearest centroid by squared Euclidean distance; ties go to the lowest id.
    pub fn assign(&self, x: &[f64]) -> Result<usize> {
        Ok(self.assign_with_distance(x)?.0)
    }

    fn assign_with_distance(&self, x: &[f64]) -> Result<(usize, f64)> {
        if x.len() != self.dim() {
            return Err(Error::shape("kmeans assign", self.dim(), x.len()));
        }
        let mut best = (0, f64::INFINITY);
        for (i, c) in self.centroids.iter().enumerate() {
            let d = sq_dist(x, c);
            if d < best.1 {
                best = (i, d);
            }
        }
        Ok(best)
    }

    /// Total within-cluster squared distance of `points` under the current centroids.
    pub fn sse(&self, points: &[Vec<f64>]) -> Result<f64> {
        points
            .iter()
            .map(|p| self.assign_with_distance(p).map(|(_, d)| d))
            .sum()
    }

    /// One mini-batch step: assign every point against the pre-step centroids,
    /// then move each point's centroid toward it with rate `1 / count`.
    pub fn minibatch_update(&mut self, batch: &[&[f64]]) -> Result<Vec<usize>> {
        if batch.is_empty() {
            return Err(Error::Clustering("empty mini-batch".into()));
        }
        let assigned = batch
            .iter()
            .map(|x| self.assign(x))
            .collect::<Result<Vec<_>>>()?;
        for (x, &c) in batch.iter().zip(&assigned) {
            self.counts[c] += 1;
            let eta = 1.0 / self.counts[c] as f64;
            for (ci, &xi) in self.centroids[c].iter_mut().zip(x.iter()) {
                *ci += eta * (xi - *ci);
            }
        }
        Ok(assigned)
    }
}

pub fn assign(x: &[f64], model: &KMeansModel) -> Result<usize> {
    model.assign(x)
}

pub fn minibatch_update(batch: &[&[f64]], model: &mut KMeansModel) -> Result<Vec<usize>> {
    model.minibatch_update(batch)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Stop once no centroid moves farther than this over an epoch.
    pub tol: f64,
    pub seed: u64,
}

impl KMeansConfig {
    pub fn new(k: usize, batch_size: usize, seed: u64) -> Self {
        KMeansConfig {
            k,
            batch_size,
            max_epochs: 100,
            tol: 1e-4,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: KMeansModel,
    pub epochs: usize,
    /// Full-set SSE at initialization and after every epoch.
    pub sse_history: Vec<f64>,
    /// Centroids reseeded because they lost every point.
    pub rescues: usize,
}

/// Fit K-means on `points` with seeded random-sample initialization.
pub fn fit(points: &[Vec<f64>], config: &KMeansConfig) -> Result<FitReport> {
    if config.k < 2 {
        return Err(Error::Clustering("k must be at least 2".into()));
    }
    if config.batch_size == 0 {
        return Err(Error::Clustering("batch size must be positive".into()));
    }
    let mut rng = RngStream::new(config.seed);
    let order = rng.permutation(points.len());
    let mut init: Vec<Vec<f64>> = Vec::with_capacity(config.k);
    for &i in &order {
        if !init.iter().any(|c| c == &points[i]) {
            init.push(points[i].clone());
            if init.len() == config.k {
                break;
            }
        }
    }
    if init.len() < config.k {
        return Err(Error::Clustering(format!(
            "need {} distinct points, found {}",
            config.k,
            init.len()
        )));
    }
    let dim = init[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::shape("kmeans fit", dim, p.len()));
    }
    let mut model = KMeansModel::new(init);
    let mut sse_history = vec![model.sse(points)?];
    let mut rescues = 0;
    let mut epochs = 0;
    let mut idx: Vec<usize> = (0..points.len()).collect();
    while epochs < config.max_epochs {
        epochs += 1;
        let start = model.centroids.clone();
        rng.shuffle(&mut idx);
        for chunk in idx.chunks(config.batch_size) {
            let batch: Vec<&[f64]> = chunk.iter().map(|&i| points[i].as_slice()).collect();
            model.minibatch_update(&batch)?;
        }
        let rescued = rescue_empty(&mut model, points)?;
        rescues += rescued;
        sse_history.push(model.sse(points)?);
        let moved = start
            .iter()
            .zip(&model.centroids)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        if rescued == 0 && moved < config.tol {
            break;
        }
    }
    Ok(FitReport {
        model,
        epochs,
        sse_history,
        rescues,
    })
}

/// Reseed every centroid that owns no point to the point farthest from its
/// current centroid. Returns the number of reseeded centroids.
fn rescue_empty(model: &mut KMeansModel, points: &[Vec<f64>]) -> Result<usize> {
    let mut rescued = 0;
    loop {
        let mut owned = vec![0usize; model.k()];
        let mut far = (0usize, -1.0f64);
        for (i, p) in points.iter().enumerate() {
            let (c, d) = model.assign_with_distance(p)?;
            owned[c] += 1;
            if d > far.1 {
                far = (i, d);
            }
        }
        let Some(empty) = owned.iter().position(|&n| n == 0) else {
            return Ok(rescued);
        };
        if far.1 <= 0.0 || rescued >= model.k() {
            return Ok(rescued);
        }
        model.centroids[empty] = points[far.0].clone();
        model.counts[empty] = 0;
        rescued += 1;
    }
}

/// Adjusted Rand index between two labelings of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings differ in length");
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0u64; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1;
    }
    let c2 = |n: u64| (n * n.saturating_sub(1)) as f64 / 2.0;
    let sum_cells: f64 = table.iter().flatten().map(|&n| c2(n)).sum();
    let sum_a: f64 = table.iter().map(|r| c2(r.iter().sum())).sum();
    let sum_b: f64 = (0..kb).map(|j| c2(table.iter().map(|r| r[j]).sum())).sum();
    let total = c2(a.len() as u64);
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        return 1.0;
    }
    (sum_cells - expected) / (max - expected)
}
