//! Intermittent sampling-importance-resampling particle filter.
//!
//! Each step propagates the particles through the transition with fresh
//! process noise (the bootstrap proposal). At measured times the particles are
//! weighted by the observation likelihood, the estimate is read off the
//! weighted ensemble, and the ensemble is systematically resampled. At
//! unmeasured times the correction is skipped and the estimate is the plain
//! ensemble mean.

mod kalman;

pub use kalman::{kalman_posterior, run_kalman_oracle, KalmanTrack};

use crate::model::{DynamicalSystem, Observations};
use crate::resample::systematic_resample;
use crate::rng::SimRng;
use crate::schedule::MeasurementSchedule;

/// Estimates `ẑ(t)` for one filter run.
///
/// If the run degenerated at `t*`, `estimates` covers `t < t*` only.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterResult {
    pub estimates: Vec<Vec<f64>>,
    pub degenerate_at: Option<usize>,
}

impl FilterResult {
    pub fn is_degenerate(&self) -> bool {
        self.degenerate_at.is_some()
    }
}

/// Every particle's likelihood weight underflowed to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Degenerate;

/// Particle states (flat, `state_dim` values per particle) and their weights.
#[derive(Clone, Debug)]
pub struct ParticleEnsemble {
    state_dim: usize,
    particles: Vec<f64>,
    weights: Vec<f64>,
    scratch: Vec<f64>,
}

impl ParticleEnsemble {
    /// `num_particles` independent draws from the initial distribution, with
    /// uniform weights.
    pub fn from_prior<S: DynamicalSystem + ?Sized>(
        system: &S,
        num_particles: usize,
        rng: &mut SimRng,
    ) -> Self {
        assert!(num_particles >= 1, "need at least one particle");
        let n = system.state_dim();
        let mut particles = vec![0.0; n * num_particles];
        for x in particles.chunks_exact_mut(n) {
            system.draw_initial(rng, x);
        }
        ParticleEnsemble {
            state_dim: n,
            particles,
            weights: vec![1.0 / num_particles as f64; num_particles],
            scratch: Vec::new(),
        }
    }

    pub fn num_particles(&self) -> usize {
        self.weights.len()
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn particle(&self, i: usize) -> &[f64] {
        &self.particles[i * self.state_dim..(i + 1) * self.state_dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Moves every particle from time `t` to `t + 1`.
    pub fn predict<S: DynamicalSystem + ?Sized>(&mut self, system: &S, t: usize, rng: &mut SimRng) {
        let n = self.state_dim;
        let mut w = vec![0.0; system.process_noise_dim()];
        self.scratch.resize(self.particles.len(), 0.0);
        for (x, next) in self
            .particles
            .chunks_exact(n)
            .zip(self.scratch.chunks_exact_mut(n))
        {
            system.draw_process_noise(t, rng, &mut w);
            system.transition(t, x, &w, next);
        }
        std::mem::swap(&mut self.particles, &mut self.scratch);
    }

    /// Reweights by the likelihood of `y` at time `t` and normalizes.
    ///
    /// Fails, leaving the weights untouched, when the weighted likelihoods sum
    /// to exactly zero in `f64`.
    pub fn correct<S: DynamicalSystem + ?Sized>(
        &mut self,
        system: &S,
        t: usize,
        y: &[f64],
    ) -> Result<(), Degenerate> {
        let n = self.state_dim;
        let log_lik: Vec<f64> = self
            .particles
            .chunks_exact(n)
            .map(|x| system.measurement_log_likelihood(t, x, y))
            .collect();

        let raw_sum: f64 = log_lik
            .iter()
            .zip(&self.weights)
            .map(|(&l, &w)| w * l.exp())
            .sum();
        if raw_sum == 0.0 || raw_sum.is_nan() {
            return Err(Degenerate);
        }

        // normalize in the shifted domain for accuracy; the zero test above
        // is on the unshifted weights
        let max = log_lik
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(&l, _)| l)
            .fold(f64::NEG_INFINITY, f64::max);
        for (w, &l) in self.weights.iter_mut().zip(&log_lik) {
            *w *= (l - max).exp();
        }
        let total: f64 = self.weights.iter().sum();
        for w in &mut self.weights {
            *w /= total;
        }
        Ok(())
    }

    /// Weighted mean of `h_t` over the ensemble.
    pub fn estimate<S: DynamicalSystem + ?Sized>(&self, system: &S, t: usize) -> Vec<f64> {
        // accumulate offsets from the first particle's output, so an ensemble
        // of identical particles returns that output exactly
        let reference = system.output(t, self.particle(0));
        let mut offset = vec![0.0; reference.len()];
        let mut z = vec![0.0; reference.len()];
        let mut total = 0.0;
        for (x, &w) in self.particles.chunks_exact(self.state_dim).zip(&self.weights) {
            system.output_into(t, x, &mut z);
            for ((o, zi), r) in offset.iter_mut().zip(&z).zip(&reference) {
                *o += w * (zi - r);
            }
            total += w;
        }
        reference.iter().zip(&offset).map(|(r, o)| r + o / total).collect()
    }

    /// Systematic resampling back to uniform weights.
    pub fn resample(&mut self, rng: &mut SimRng) {
        let n = self.state_dim;
        let indices = systematic_resample(&self.weights, rng);
        self.scratch.clear();
        for i in indices {
            self.scratch.extend_from_slice(&self.particles[i * n..(i + 1) * n]);
        }
        std::mem::swap(&mut self.particles, &mut self.scratch);
        let p = self.weights.len();
        self.weights.fill(1.0 / p as f64);
    }
}

/// Runs the intermittent SIR filter over `t = 0…T`.
///
/// `observations` must be keyed exactly by the times in `schedule`. At
/// `t = 0` the particles come from the initial distribution; a measurement at
/// `t = 0` is applied before any propagation. Degeneracy is reported through
/// [`FilterResult::degenerate_at`], not as an error.
pub fn run_filter<S: DynamicalSystem + ?Sized>(
    system: &S,
    schedule: &MeasurementSchedule,
    observations: &Observations,
    num_particles: usize,
    rng: &mut SimRng,
) -> FilterResult {
    let horizon = system.horizon();
    assert_eq!(schedule.horizon(), horizon, "schedule horizon does not match the system");
    assert!(
        observations.len() == schedule.cardinality()
            && observations.keys().all(|&t| schedule.contains(t)),
        "observations must be keyed exactly by the schedule"
    );

    let mut ensemble = ParticleEnsemble::from_prior(system, num_particles, rng);
    let mut estimates = Vec::with_capacity(horizon + 1);
    for t in 0..=horizon {
        if t > 0 {
            ensemble.predict(system, t - 1, rng);
        }
        match observations.get(&t) {
            Some(y) => {
                if ensemble.correct(system, t, y).is_err() {
                    return FilterResult {
                        estimates,
                        degenerate_at: Some(t),
                    };
                }
                estimates.push(ensemble.estimate(system, t));
                ensemble.resample(rng);
            }
            None => estimates.push(ensemble.estimate(system, t)),
        }
    }
    FilterResult {
        estimates,
        degenerate_at: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{simulate, BenchmarkSystem, LinearGaussianSystem};
    use crate::rng::seeded;
    use crate::schedule::regular_schedule;

    #[test]
    fn empty_schedule_with_deterministic_prior() {
        let s = LinearGaussianSystem::new(20, 1.0, 1.0, 0.0, 1.0).with_initial(3.0, 0.0);
        let out = run_filter(&s, &MeasurementSchedule::empty(20), &Observations::new(), 50, &mut seeded(1));
        assert_eq!(out.degenerate_at, None);
        assert_eq!(out.estimates.len(), 21);
        for z in &out.estimates {
            assert!((z[0] - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_schedule_is_reproducible() {
        let s = BenchmarkSystem::new(30);
        let m = MeasurementSchedule::empty(30);
        let a = run_filter(&s, &m, &Observations::new(), 200, &mut seeded(4));
        let b = run_filter(&s, &m, &Observations::new(), 200, &mut seeded(4));
        assert_eq!(a, b);
    }

    #[test]
    fn far_observation_degenerates() {
        let s = BenchmarkSystem::new(60);
        let m = MeasurementSchedule::new(60, vec![17]).unwrap();
        let obs: Observations = [(17, vec![1e9])].into_iter().collect();
        let out = run_filter(&s, &m, &obs, 100, &mut seeded(2));
        assert_eq!(out.degenerate_at, Some(17));
        assert_eq!(out.estimates.len(), 17);
    }

    #[test]
    fn weights_normalized_after_correction() {
        let s = BenchmarkSystem::new(60);
        let m = regular_schedule(60, 21).unwrap();
        let traj = simulate(&s, &m, &mut seeded(8));
        let mut rng = seeded(9);
        let mut ens = ParticleEnsemble::from_prior(&s, 500, &mut rng);
        for t in 0..=60 {
            if t > 0 {
                ens.predict(&s, t - 1, &mut rng);
            }
            if let Some(y) = traj.observations.get(&t) {
                ens.correct(&s, t, y).unwrap();
                let sum: f64 = ens.weights().iter().sum();
                assert!((sum - 1.0).abs() < 1e-12, "t={t}: {sum}");
                ens.resample(&mut rng);
            }
        }
    }

    #[test]
    fn degenerate_correction_leaves_weights() {
        let s = BenchmarkSystem::new(5);
        let mut ens = ParticleEnsemble::from_prior(&s, 10, &mut seeded(1));
        let before = ens.weights().to_vec();
        assert_eq!(ens.correct(&s, 0, &[1e9]), Err(Degenerate));
        assert_eq!(ens.weights(), before.as_slice());
    }

    #[test]
    fn noise_free_linear_system_is_recovered() {
        let s = LinearGaussianSystem::new(15, 0.8, 1.0, 0.0, 0.0).with_initial(2.0, 0.0);
        let m = MeasurementSchedule::full(15);
        let traj = simulate(&s, &m, &mut seeded(1));
        let out = run_filter(&s, &m, &traj.observations, 20, &mut seeded(2));
        for (z, zhat) in traj.outputs.iter().zip(&out.estimates) {
            assert_eq!(z, zhat);
        }
    }

    #[test]
    #[should_panic]
    fn observations_must_match_schedule() {
        let s = BenchmarkSystem::new(5);
        let obs: Observations = [(2, vec![0.0])].into_iter().collect();
        run_filter(&s, &MeasurementSchedule::empty(5), &obs, 10, &mut seeded(0));
    }
}
