pub const DEFAULT_BINS: usize = 100;

/// `sum_j lambda * p_j - |p_j - mean(p)|` and its (sub)gradient.
///
/// The gradient differentiates through the mean, so coordinate `k` receives
/// `lambda - s_k + mean(s)` with `s_j = sign(p_j - mean(p))` and `s = 0` at a kink.
pub fn polarization_reg(p: &[f64], lambda: f64) -> (f64, Vec<f64>) {
    weighted_polarization_reg(p, lambda, 1.0)
}

/// `sum_j lambda * p_j - weight * |p_j - mean(p)|`; `weight = 1` is [`polarization_reg`].
pub fn weighted_polarization_reg(p: &[f64], lambda: f64, weight: f64) -> (f64, Vec<f64>) {
    let n = p.len() as f64;
    let mean = p.iter().sum::<f64>() / n;
    let signs: Vec<f64> = p
        .iter()
        .map(|&v| {
            let d = v - mean;
            if d > 0.0 {
                1.0
            } else if d < 0.0 {
                -1.0
            } else {
                0.0
            }
        })
        .collect();
    let mean_sign = signs.iter().sum::<f64>() / n;
    let value = p.iter().map(|&v| lambda * v - weight * (v - mean).abs()).sum();
    let grad = signs.iter().map(|s| lambda - weight * (s - mean_sign)).collect();
    (value, grad)
}

/// The expected-l0 term alone: `lambda * sum_j p_j`.
pub fn sparsity_reg(p: &[f64], lambda: f64) -> (f64, Vec<f64>) {
    (lambda * p.iter().sum::<f64>(), vec![lambda; p.len()])
}

/// Lower edge of the first saddle bin of the histogram of `p` over `[0, 1]`.
///
/// Non-empty bins are scanned left to right; a bin is a saddle when it holds
/// strictly fewer values than the nearest non-empty bin on either side.
/// Without a saddle the mean of `p` is returned.
pub fn find_threshold(p: &[f64], bins: usize) -> f64 {
    match first_saddle(&histogram(p, bins)) {
        Some(b) => b as f64 / bins as f64,
        None => mean_within_range(p),
    }
}

/// Arithmetic mean, kept inside `[min, max]` against rounding.
fn mean_within_range(p: &[f64]) -> f64 {
    let mean = p.iter().sum::<f64>() / p.len() as f64;
    let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    mean.clamp(lo, hi)
}

/// Whether the histogram of `p` has a saddle bin (no mean fallback).
pub fn has_saddle(p: &[f64], bins: usize) -> bool {
    first_saddle(&histogram(p, bins)).is_some()
}

pub(crate) fn histogram(p: &[f64], bins: usize) -> Vec<usize> {
    assert!(bins >= 1, "histogram needs at least one bin");
    let mut counts = vec![0usize; bins];
    for &v in p {
        let b = ((v * bins as f64).floor().max(0.0) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
}

pub(crate) fn first_saddle(counts: &[usize]) -> Option<usize> {
    let occupied: Vec<usize> = (0..counts.len()).filter(|&i| counts[i] > 0).collect();
    occupied
        .windows(3)
        .find(|w| counts[w[1]] < counts[w[0]] && counts[w[1]] < counts[w[2]])
        .map(|w| w[1])
}
