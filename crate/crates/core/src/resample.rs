//! Low-variance sampling with equally spaced pointers.
//!
//! Systematic resampling of particles and stochastic universal sampling of
//! parents are the same procedure: one uniform offset, `count` pointers spaced
//! `total / count` apart over the cumulative weight wheel. Entry `i` is hit
//! either `floor(count·pᵢ)` or `ceil(count·pᵢ)` times.

use rand::Rng;

use crate::rng::SimRng;

/// Indices hit by pointers `offset + k` (`k = 0…count−1`, `offset ∈ [0, 1)`)
/// on the wheel rescaled to total length `count`. Returned in wheel order.
///
/// Zero-weight entries are never hit. The caller guarantees a positive total.
pub(crate) fn equally_spaced(weights: &[f64], count: usize, offset: f64) -> Vec<usize> {
    debug_assert!((0.0..1.0).contains(&offset));
    let total: f64 = weights.iter().sum();
    debug_assert!(total > 0.0);
    let scale = count as f64 / total;

    let last_positive = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
    let mut out = Vec::with_capacity(count);
    let mut cumulative = 0.0;
    let mut i = 0;
    for k in 0..count {
        let pointer = offset + k as f64;
        // the last positive entry absorbs accumulated rounding so every
        // pointer lands on the wheel
        while i < last_positive && cumulative + weights[i] * scale <= pointer {
            cumulative += weights[i] * scale;
            i += 1;
        }
        out.push(i);
    }
    out
}

/// Systematic resampling: `weights.len()` indices drawn with a single uniform
/// offset.
///
/// # Panics
/// If the weights do not sum to one (within `1e-9`) or any is negative.
pub fn systematic_resample(weights: &[f64], rng: &mut SimRng) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    assert!(
        (total - 1.0).abs() < 1e-9 && weights.iter().all(|&w| w >= 0.0),
        "systematic_resample needs normalized weights, got sum {total}"
    );
    let offset: f64 = rng.random();
    equally_spaced(weights, weights.len(), offset)
}

/// Number of times each index appears in `indices`.
pub fn counts(indices: &[usize], len: usize) -> Vec<usize> {
    let mut c = vec![0; len];
    for &i in indices {
        c[i] += 1;
    }
    c
}
