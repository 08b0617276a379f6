//! Genetic operators on fixed-weight bitstrings.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::resample::equally_spaced;
use crate::rng::SimRng;
use crate::schedule::ScheduleBits;

/// Floor applied to sigma-scaled expected values of live individuals.
pub const EXPECTED_VALUE_FLOOR: f64 = 0.1;

/// Sigma scaling for a minimization problem.
///
/// Fitness is `−cost`. With `f̄` and `σ` the mean and population standard
/// deviation over live individuals, each live individual gets
/// `max(0.1, 1 + (f − f̄)/(c·σ))`, or 1 when `σ = 0`. Killed individuals
/// (`None`) get 0.
pub fn sigma_scale(costs: &[Option<f64>], sigma_coefficient: f64) -> Vec<f64> {
    let live: Vec<f64> = costs.iter().flatten().map(|c| -c).collect();
    if live.is_empty() {
        return vec![0.0; costs.len()];
    }
    let n = live.len() as f64;
    let mean = live.iter().sum::<f64>() / n;
    let std = (live.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>() / n).sqrt();
    costs
        .iter()
        .map(|cost| match cost {
            None => 0.0,
            Some(_) if std == 0.0 => 1.0,
            Some(c) => (1.0 + (-c - mean) / (sigma_coefficient * std)).max(EXPECTED_VALUE_FLOOR),
        })
        .collect()
}

/// Stochastic universal sampling: one spin, `count` equally spaced pointers.
/// Indices come back in wheel order.
pub fn sus_select(expected_values: &[f64], count: usize, rng: &mut SimRng) -> Result<Vec<usize>> {
    let total: f64 = expected_values.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::EmptySelectionPool);
    }
    let offset: f64 = rng.random();
    Ok(equally_spaced(expected_values, count, offset))
}

/// Splits the positions where the parents disagree evenly and at random
/// between the two children; agreeing positions are inherited by both.
///
/// # Panics
/// If the parents differ in length or popcount.
pub fn count_preserving_crossover(
    parent1: &ScheduleBits,
    parent2: &ScheduleBits,
    rng: &mut SimRng,
) -> (ScheduleBits, ScheduleBits) {
    assert_eq!(parent1.len(), parent2.len(), "parents differ in length");
    assert_eq!(parent1.popcount(), parent2.popcount(), "parents differ in popcount");
    let mut disagree: Vec<usize> = (0..parent1.len())
        .filter(|&t| parent1.get(t) != parent2.get(t))
        .collect();
    disagree.shuffle(rng);
    let (to_first, to_second) = disagree.split_at(disagree.len() / 2);

    let mut child1 = parent1.clone();
    let mut child2 = parent2.clone();
    for &t in to_first {
        child1.set(t, true);
        child2.set(t, false);
    }
    for &t in to_second {
        child1.set(t, false);
        child2.set(t, true);
    }
    (child1, child2)
}

/// Flips each gene with probability `p_gene`, then restores the original
/// popcount by clearing (or setting) uniformly chosen bits.
pub fn mutate(individual: &ScheduleBits, p_gene: f64, rng: &mut SimRng) -> ScheduleBits {
    let target = individual.popcount();
    let mut out = individual.clone();
    if p_gene > 0.0 {
        for t in 0..out.len() {
            if rng.random_bool(p_gene) {
                out.flip(t);
            }
        }
    }
    let mut count = out.popcount();
    while count != target {
        let want = count < target;
        let candidates: Vec<usize> = (0..out.len()).filter(|&t| out.get(t) != want).collect();
        let t = candidates[rng.random_range(0..candidates.len())];
        out.set(t, want);
        count = out.popcount();
    }
    out
}
