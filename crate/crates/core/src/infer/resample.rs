//! Weight normalization and systematic resampling.

use rand::Rng;

use crate::dist::log_sum_exp;
use crate::error::{Error, Result};

/// Normalized linear weights; fails when every weight is zero.
pub fn normalized_weights(log_weights: &[f64]) -> Result<Vec<f64>> {
    let total = log_sum_exp(log_weights);
    if !total.is_finite() {
        return Err(Error::DegenerateCloud);
    }
    Ok(log_weights.iter().map(|w| (w - total).exp()).collect())
}

pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().map(|w| w * w).sum();
    if s > 0.0 {
        1.0 / s
    } else {
        0.0
    }
}

/// Systematic resampling: `n` ancestor indices, in non-decreasing order,
/// drawn with a single uniform offset.
pub fn systematic_indices<R: Rng + ?Sized>(weights: &[f64], n: usize, rng: &mut R) -> Vec<usize> {
    let u0: f64 = rng.random::<f64>() / n as f64;
    let mut out = Vec::with_capacity(n);
    let mut acc = 0.0;
    let mut i = 0;
    let last = weights.iter().rposition(|w| *w > 0.0).unwrap_or(0);
    for k in 0..n {
        let u = u0 + k as f64 / n as f64;
        while i < last && acc + weights[i] <= u {
            acc += weights[i];
            i += 1;
        }
        out.push(i);
    }
    out
}
