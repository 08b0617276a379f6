//! Exact filter for [`LinearGaussianSystem`], used to check the particle
//! filter. The update is skipped at unmeasured times, as in the particle
//! filter.

use super::FilterResult;
use crate::model::{LinearGaussianSystem, Observations};
use crate::schedule::MeasurementSchedule;

/// Posterior means and variances of `x(t)` given the measurements up to `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct KalmanTrack {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

impl KalmanTrack {
    pub fn mean_posterior_std(&self) -> f64 {
        self.variances.iter().map(|v| v.sqrt()).sum::<f64>() / self.variances.len() as f64
    }
}

pub fn kalman_posterior(
    system: &LinearGaussianSystem,
    schedule: &MeasurementSchedule,
    observations: &Observations,
) -> KalmanTrack {
    assert_eq!(schedule.horizon(), system.horizon, "schedule horizon does not match the system");
    let mut mean = system.initial_mean;
    let mut var = system.initial_variance;
    let mut means = Vec::with_capacity(system.horizon + 1);
    let mut variances = Vec::with_capacity(system.horizon + 1);
    for t in 0..=system.horizon {
        if t > 0 {
            mean *= system.a;
            var = system.a * system.a * var + system.q;
        }
        if let Some(y) = observations.get(&t) {
            let innovation_var = system.c * system.c * var + system.r;
            if innovation_var > 0.0 {
                let gain = var * system.c / innovation_var;
                mean += gain * (y[0] - system.c * mean);
                var *= 1.0 - gain * system.c;
            }
        }
        means.push(mean);
        variances.push(var);
    }
    KalmanTrack { means, variances }
}

/// Posterior means as a [`FilterResult`]; never degenerate.
pub fn run_kalman_oracle(
    system: &LinearGaussianSystem,
    schedule: &MeasurementSchedule,
    observations: &Observations,
) -> FilterResult {
    let track = kalman_posterior(system, schedule, observations);
    FilterResult {
        estimates: track.means.into_iter().map(|m| vec![m]).collect(),
        degenerate_at: None,
    }
}
