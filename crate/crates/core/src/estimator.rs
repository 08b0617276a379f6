//! Monte Carlo estimate of the expected filtering MSE of a schedule.
//!
//! Each draw simulates a fresh trajectory, filters its observations, and
//! scores the estimates against the true outputs:
//!
//! ```text
//! Ê_MSE[M] = 1/(K(T+1)) Σ_k Σ_t ‖z^k(t) − ẑ^k_M(t)‖²
//! ```

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filter::run_filter;
use crate::model::{simulate, DynamicalSystem};
use crate::rng::substream;
use crate::schedule::MeasurementSchedule;

/// Mean over `t` of `‖z(t) − ẑ(t)‖²`.
///
/// # Panics
/// On length mismatch, either between the sequences or between paired vectors.
pub fn trajectory_mse(z: &[Vec<f64>], zhat: &[Vec<f64>]) -> f64 {
    assert_eq!(z.len(), zhat.len(), "output and estimate sequences differ in length");
    assert!(!z.is_empty(), "empty sequences");
    let total: f64 = z
        .iter()
        .zip(zhat)
        .map(|(a, b)| {
            assert_eq!(a.len(), b.len(), "output dimension mismatch");
            a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
        })
        .sum();
    total / z.len() as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostEstimate {
    /// Mean of the non-degenerate per-draw MSEs.
    pub value: f64,
    pub draws: usize,
    /// One entry per draw, `None` where the filter degenerated.
    pub per_draw_mse: Vec<Option<f64>>,
    pub degenerate_draws: usize,
}

impl CostEstimate {
    /// Aggregates per-draw results in index order. Fails if every draw
    /// degenerated.
    pub fn from_draws(per_draw_mse: Vec<Option<f64>>) -> Result<Self> {
        let draws = per_draw_mse.len();
        let (sum, used) = per_draw_mse
            .iter()
            .flatten()
            .fold((0.0, 0usize), |(s, n), &m| (s + m, n + 1));
        if used == 0 {
            return Err(Error::Unevaluable { draws });
        }
        Ok(CostEstimate {
            value: sum / used as f64,
            draws,
            degenerate_draws: draws - used,
            per_draw_mse,
        })
    }

    pub fn has_degenerate_draws(&self) -> bool {
        self.degenerate_draws > 0
    }
}

/// One filtering draw: simulate, filter, score. `None` if the filter
/// degenerated.
pub fn draw_mse<S: DynamicalSystem + ?Sized>(
    system: &S,
    schedule: &MeasurementSchedule,
    num_particles: usize,
    seed: u64,
    draw: u64,
) -> Option<f64> {
    let mut trajectory_rng = substream(seed, 2 * draw);
    let mut filter_rng = substream(seed, 2 * draw + 1);
    let trajectory = simulate(system, schedule, &mut trajectory_rng);
    let result = run_filter(system, schedule, &trajectory.observations, num_particles, &mut filter_rng);
    if result.is_degenerate() {
        None
    } else {
        Some(trajectory_mse(&trajectory.outputs, &result.estimates))
    }
}

/// `Ê_MSE[M]` from `draws` independent draws.
///
/// Draw `k` uses streams derived from `(seed, k)` only, so the result does not
/// depend on how the draws are spread over threads. Degenerate draws are
/// counted and left out of the mean; if all of them degenerate the schedule is
/// [`Error::Unevaluable`].
pub fn estimate_expected_mse<S: DynamicalSystem + ?Sized>(
    system: &S,
    schedule: &MeasurementSchedule,
    draws: usize,
    num_particles: usize,
    seed: u64,
) -> Result<CostEstimate> {
    if draws == 0 || num_particles == 0 {
        return Err(Error::InvalidParameter(format!(
            "need at least one draw and one particle (K = {draws}, P = {num_particles})"
        )));
    }
    let per_draw: Vec<Option<f64>> = (0..draws as u64)
        .into_par_iter()
        .map(|k| draw_mse(system, schedule, num_particles, seed, k))
        .collect();
    CostEstimate::from_draws(per_draw)
}

/// `g = (mse_reg − mse_opt) / mse_reg`, positive when the candidate schedule
/// beats the reference.
pub fn relative_gain(mse_reg: f64, mse_opt: f64) -> Result<f64> {
    if mse_reg.is_nan() || mse_reg <= 0.0 || mse_reg.is_infinite() {
        return Err(Error::UndefinedGain(mse_reg));
    }
    Ok((mse_reg - mse_opt) / mse_reg)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GainSample {
    pub mse_reg: f64,
    pub mse_opt: f64,
    pub gain: f64,
}

impl GainSample {
    pub fn new(mse_reg: f64, mse_opt: f64) -> Result<Self> {
        Ok(GainSample {
            mse_reg,
            mse_opt,
            gain: relative_gain(mse_reg, mse_opt)?,
        })
    }
}
