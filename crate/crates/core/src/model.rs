//! State-space systems
//!
//! ```text
//! x(t+1) = f_t(x(t), w(t))      t = 0…T−1
//! y(t)   = g_t(x(t), v(t))      t ∈ M
//! z(t)   = h_t(x(t))            t = 0…T
//! x(0)   ~ F
//! ```
//!
//! Noise is sampled by the system but passed explicitly to the transition and
//! measurement maps, so draws can be logged or replayed.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::rng::SimRng;
use crate::schedule::MeasurementSchedule;

/// Observations `y(t)` keyed by measurement time.
pub type Observations = BTreeMap<usize, Vec<f64>>;

/// A discrete-time stochastic system on the horizon `t = 0…T`.
///
/// The `*_into` style methods write into caller-provided buffers and do no
/// range checking; they are the particle filter's hot path. The checked,
/// allocating wrappers [`step`](Self::step), [`measure`](Self::measure),
/// [`output`](Self::output) and [`sample_initial`](Self::sample_initial)
/// panic on out-of-range times.
pub trait DynamicalSystem: Send + Sync {
    fn state_dim(&self) -> usize;
    fn obs_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    /// Final time index `T`.
    fn horizon(&self) -> usize;

    fn process_noise_dim(&self) -> usize {
        self.state_dim()
    }

    fn measurement_noise_dim(&self) -> usize {
        self.obs_dim()
    }

    fn transition(&self, t: usize, x: &[f64], w: &[f64], next: &mut [f64]);
    fn observation(&self, t: usize, x: &[f64], v: &[f64], y: &mut [f64]);
    fn output_into(&self, t: usize, x: &[f64], z: &mut [f64]);

    fn draw_initial(&self, rng: &mut SimRng, x: &mut [f64]);
    fn draw_process_noise(&self, t: usize, rng: &mut SimRng, w: &mut [f64]);
    fn draw_measurement_noise(&self, t: usize, rng: &mut SimRng, v: &mut [f64]);

    /// `log p(y | x)` at time `t`.
    fn measurement_log_likelihood(&self, t: usize, x: &[f64], y: &[f64]) -> f64;

    fn step(&self, t: usize, x: &[f64], w: &[f64]) -> Vec<f64> {
        assert!(t < self.horizon(), "transition time {t} outside [0, {})", self.horizon());
        assert_eq!(x.len(), self.state_dim(), "state dimension");
        let mut next = vec![0.0; self.state_dim()];
        self.transition(t, x, w, &mut next);
        next
    }

    fn measure(&self, t: usize, x: &[f64], v: &[f64]) -> Vec<f64> {
        assert!(t <= self.horizon(), "measurement time {t} outside [0, {}]", self.horizon());
        let mut y = vec![0.0; self.obs_dim()];
        self.observation(t, x, v, &mut y);
        y
    }

    fn output(&self, t: usize, x: &[f64]) -> Vec<f64> {
        assert!(t <= self.horizon(), "output time {t} outside [0, {}]", self.horizon());
        let mut z = vec![0.0; self.output_dim()];
        self.output_into(t, x, &mut z);
        z
    }

    fn sample_initial(&self, rng: &mut SimRng) -> Vec<f64> {
        let mut x = vec![0.0; self.state_dim()];
        self.draw_initial(rng, &mut x);
        x
    }
}

fn gaussian_log_pdf(residual: f64, std: f64) -> f64 {
    -0.5 * (2.0 * PI).ln() - std.ln() - residual * residual / (2.0 * std * std)
}

/// The univariate nonlinear growth model
///
/// ```text
/// x(t+1) = x/2 + 25x/(1+x²) + 8cos(1.2t) + w,   w ~ N(0, 1)
/// y(t)   = x²/20 + v,                            v ~ N(0, (sin(0.25t)+2)²)
/// z(t)   = x,                                    x(0) ~ N(0, 5²)
/// ```
#[derive(Clone, Debug)]
pub struct BenchmarkSystem {
    horizon: usize,
    forcing: Vec<f64>,
    measurement_std: Vec<f64>,
}

impl BenchmarkSystem {
    pub const INITIAL_STD: f64 = 5.0;
    pub const PROCESS_STD: f64 = 1.0;

    pub fn new(horizon: usize) -> Self {
        assert!(horizon >= 1, "horizon must be at least 1");
        BenchmarkSystem {
            horizon,
            forcing: (0..horizon).map(|t| 8.0 * (1.2 * t as f64).cos()).collect(),
            measurement_std: (0..=horizon)
                .map(|t| (0.25 * t as f64).sin() + 2.0)
                .collect(),
        }
    }

    /// Standard deviation of `v(t)`.
    pub fn measurement_std(&self, t: usize) -> f64 {
        self.measurement_std[t]
    }
}

impl DynamicalSystem for BenchmarkSystem {
    fn state_dim(&self) -> usize {
        1
    }

    fn obs_dim(&self) -> usize {
        1
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn transition(&self, t: usize, x: &[f64], w: &[f64], next: &mut [f64]) {
        let x = x[0];
        next[0] = x / 2.0 + 25.0 * x / (1.0 + x * x) + self.forcing[t] + w[0];
    }

    fn observation(&self, _t: usize, x: &[f64], v: &[f64], y: &mut [f64]) {
        y[0] = x[0] * x[0] / 20.0 + v[0];
    }

    fn output_into(&self, _t: usize, x: &[f64], z: &mut [f64]) {
        z[0] = x[0];
    }

    fn draw_initial(&self, rng: &mut SimRng, x: &mut [f64]) {
        x[0] = Self::INITIAL_STD * rng.sample::<f64, _>(StandardNormal);
    }

    fn draw_process_noise(&self, _t: usize, rng: &mut SimRng, w: &mut [f64]) {
        w[0] = Self::PROCESS_STD * rng.sample::<f64, _>(StandardNormal);
    }

    fn draw_measurement_noise(&self, t: usize, rng: &mut SimRng, v: &mut [f64]) {
        v[0] = self.measurement_std[t] * rng.sample::<f64, _>(StandardNormal);
    }

    fn measurement_log_likelihood(&self, t: usize, x: &[f64], y: &[f64]) -> f64 {
        gaussian_log_pdf(y[0] - x[0] * x[0] / 20.0, self.measurement_std[t])
    }
}

/// Scalar linear-Gaussian system, the case where the Kalman filter is exact.
///
/// `x(t+1) = a·x + w`, `y = c·x + v`, `z = x`, with `w ~ N(0, q)`,
/// `v ~ N(0, r)` and `x(0) ~ N(initial_mean, initial_variance)`. Zero
/// variances are allowed and make the corresponding draw deterministic.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearGaussianSystem {
    pub horizon: usize,
    pub a: f64,
    pub c: f64,
    pub q: f64,
    pub r: f64,
    pub initial_mean: f64,
    pub initial_variance: f64,
}

impl LinearGaussianSystem {
    pub fn new(horizon: usize, a: f64, c: f64, q: f64, r: f64) -> Self {
        LinearGaussianSystem {
            horizon,
            a,
            c,
            q,
            r,
            initial_mean: 0.0,
            initial_variance: 1.0,
        }
    }

    pub fn with_initial(mut self, mean: f64, variance: f64) -> Self {
        self.initial_mean = mean;
        self.initial_variance = variance;
        self
    }

    pub fn validate(&self) -> crate::Result<()> {
        let ok = self.horizon >= 1
            && self.q >= 0.0
            && self.r >= 0.0
            && self.initial_variance >= 0.0
            && [self.a, self.c, self.q, self.r, self.initial_mean, self.initial_variance]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(crate::Error::InvalidParameter(format!(
                "linear-Gaussian system needs horizon >= 1 and finite non-negative variances: {self:?}"
            )))
        }
    }
}

impl DynamicalSystem for LinearGaussianSystem {
    fn state_dim(&self) -> usize {
        1
    }

    fn obs_dim(&self) -> usize {
        1
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn transition(&self, _t: usize, x: &[f64], w: &[f64], next: &mut [f64]) {
        next[0] = self.a * x[0] + w[0];
    }

    fn observation(&self, _t: usize, x: &[f64], v: &[f64], y: &mut [f64]) {
        y[0] = self.c * x[0] + v[0];
    }

    fn output_into(&self, _t: usize, x: &[f64], z: &mut [f64]) {
        z[0] = x[0];
    }

    fn draw_initial(&self, rng: &mut SimRng, x: &mut [f64]) {
        x[0] = if self.initial_variance == 0.0 {
            self.initial_mean
        } else {
            self.initial_mean + self.initial_variance.sqrt() * rng.sample::<f64, _>(StandardNormal)
        };
    }

    fn draw_process_noise(&self, _t: usize, rng: &mut SimRng, w: &mut [f64]) {
        w[0] = if self.q == 0.0 {
            0.0
        } else {
            self.q.sqrt() * rng.sample::<f64, _>(StandardNormal)
        };
    }

    fn draw_measurement_noise(&self, _t: usize, rng: &mut SimRng, v: &mut [f64]) {
        v[0] = if self.r == 0.0 {
            0.0
        } else {
            self.r.sqrt() * rng.sample::<f64, _>(StandardNormal)
        };
    }

    fn measurement_log_likelihood(&self, _t: usize, x: &[f64], y: &[f64]) -> f64 {
        let residual = y[0] - self.c * x[0];
        if self.r == 0.0 {
            // point mass at c·x
            return if residual == 0.0 { 0.0 } else { f64::NEG_INFINITY };
        }
        gaussian_log_pdf(residual, self.r.sqrt())
    }
}

/// One realisation of the system over `t = 0…T`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub states: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
    pub observations: Observations,
}

impl Trajectory {
    /// Keeps only the observations at times in `schedule`. Times missing from
    /// the trajectory are an error in the caller.
    pub fn restrict(&self, schedule: &MeasurementSchedule) -> Observations {
        schedule
            .iter()
            .map(|t| {
                let y = self
                    .observations
                    .get(&t)
                    .unwrap_or_else(|| panic!("trajectory has no observation at t = {t}"));
                (t, y.clone())
            })
            .collect()
    }
}

/// Draws `x(0)`, then for each `t` the measurement noise (only if `t ∈ M`)
/// followed by the process noise, all from `rng`.
pub fn simulate<S: DynamicalSystem + ?Sized>(
    system: &S,
    schedule: &MeasurementSchedule,
    rng: &mut SimRng,
) -> Trajectory {
    let horizon = system.horizon();
    assert_eq!(
        schedule.horizon(),
        horizon,
        "schedule horizon does not match the system"
    );
    let mut w = vec![0.0; system.process_noise_dim()];
    let mut v = vec![0.0; system.measurement_noise_dim()];

    let mut states = Vec::with_capacity(horizon + 1);
    let mut outputs = Vec::with_capacity(horizon + 1);
    let mut observations = Observations::new();

    let mut x = system.sample_initial(rng);
    for t in 0..=horizon {
        if schedule.contains(t) {
            system.draw_measurement_noise(t, rng, &mut v);
            observations.insert(t, system.measure(t, &x, &v));
        }
        outputs.push(system.output(t, &x));
        states.push(x.clone());
        if t < horizon {
            system.draw_process_noise(t, rng, &mut w);
            x = system.step(t, &x, &w);
        }
    }
    Trajectory {
        states,
        outputs,
        observations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::schedule::regular_schedule;

    #[test]
    fn benchmark_step_by_hand() {
        let s = BenchmarkSystem::new(60);
        assert_eq!(s.step(0, &[0.0], &[0.0]), vec![8.0]);
        assert_eq!(s.step(0, &[1.0], &[0.0]), vec![21.0]);
        let x = 2.0;
        let expected = 1.0 + 50.0 / 5.0 + 8.0 * (1.2f64 * 3.0).cos() + 0.25;
        assert!((s.step(3, &[x], &[0.25])[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn linear_identity_step() {
        let s = LinearGaussianSystem::new(10, 1.0, 1.0, 1.0, 1.0);
        assert_eq!(s.step(0, &[3.0], &[0.0]), vec![3.0]);
    }

    #[test]
    #[should_panic]
    fn step_rejects_final_time() {
        BenchmarkSystem::new(5).step(5, &[0.0], &[0.0]);
    }

    #[test]
    #[should_panic]
    fn measure_rejects_out_of_range() {
        BenchmarkSystem::new(5).measure(6, &[0.0], &[0.0]);
    }

    #[test]
    fn benchmark_measure_by_hand() {
        let s = BenchmarkSystem::new(60);
        assert_eq!(s.measure(0, &[0.0], &[0.0]), vec![0.0]);
        assert_eq!(s.measure(5, &[10.0], &[0.0]), vec![5.0]);
        assert!((s.measure(0, &[2.0], &[0.5])[0] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn benchmark_output_is_identity() {
        let s = BenchmarkSystem::new(60);
        for (t, x) in [(0, 7.3), (17, 0.0), (60, -4.0)] {
            assert_eq!(s.output(t, &[x]), vec![x]);
        }
    }

    #[test]
    fn benchmark_log_likelihood_values() {
        let s = BenchmarkSystem::new(60);
        let base = -0.5 * (8.0 * PI).ln();
        assert!((base - -1.612_085_713_764_618).abs() < 1e-12);
        assert!((s.measurement_log_likelihood(0, &[0.0], &[0.0]) - base).abs() < 1e-12);
        assert!((s.measurement_log_likelihood(0, &[0.0], &[2.0]) - (base - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn likelihood_mode_is_noise_free_measurement() {
        let s = BenchmarkSystem::new(60);
        for (t, x) in [(0, 1.5), (7, -3.0), (33, 12.0)] {
            let mode = s.measure(t, &[x], &[0.0])[0];
            let at_mode = s.measurement_log_likelihood(t, &[x], &[mode]);
            for dy in [-1.0, -1e-3, 1e-3, 1.0] {
                assert!(s.measurement_log_likelihood(t, &[x], &[mode + dy]) < at_mode);
            }
        }
    }

    #[test]
    fn likelihood_integrates_to_one() {
        let s = BenchmarkSystem::new(60);
        for (t, x) in [(0, 0.0), (5, 3.0), (40, -7.5)] {
            let centre = x * x / 20.0;
            let (lo, hi, n) = (centre - 40.0, centre + 40.0, 80_000);
            let h = (hi - lo) / n as f64;
            // trapezoid rule
            let integral: f64 = (0..=n)
                .map(|i| {
                    let y = lo + i as f64 * h;
                    let weight = if i == 0 || i == n { 0.5 } else { 1.0 };
                    weight * s.measurement_log_likelihood(t, &[x], &[y]).exp()
                })
                .sum::<f64>()
                * h;
            assert!((integral - 1.0).abs() < 1e-3, "t={t}: {integral}");
        }
    }

    #[test]
    fn benchmark_initial_distribution() {
        let s = BenchmarkSystem::new(60);
        let mut rng = seeded(11);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| s.sample_initial(&mut rng)[0]).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let std = (draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        assert!(mean.abs() < 0.1, "{mean}");
        assert!((std - 5.0).abs() < 0.1, "{std}");
    }

    #[test]
    fn benchmark_noise_scales() {
        let s = BenchmarkSystem::new(60);
        let mut rng = seeded(12);
        let n = 100_000;
        let sample_var = |draw: &mut dyn FnMut(&mut SimRng) -> f64, rng: &mut SimRng| {
            let xs: Vec<f64> = (0..n).map(|_| draw(rng)).collect();
            let m = xs.iter().sum::<f64>() / n as f64;
            xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64
        };
        let mut w = [0.0];
        let var_w = sample_var(
            &mut |r| {
                s.draw_process_noise(0, r, &mut w);
                w[0]
            },
            &mut rng,
        );
        assert!((var_w - 1.0).abs() < 0.05, "{var_w}");
        for t in [0, 6, 19] {
            let sigma = (0.25 * t as f64).sin() + 2.0;
            let mut v = [0.0];
            let std_v = sample_var(
                &mut |r| {
                    s.draw_measurement_noise(t, r, &mut v);
                    v[0]
                },
                &mut rng,
            )
            .sqrt();
            assert!((std_v / sigma - 1.0).abs() < 0.02, "t={t}: {std_v} vs {sigma}");
        }
    }

    #[test]
    fn degenerate_initial_distribution() {
        let s = LinearGaussianSystem::new(5, 1.0, 1.0, 1.0, 1.0).with_initial(2.5, 0.0);
        let mut rng = seeded(3);
        for _ in 0..10 {
            assert_eq!(s.sample_initial(&mut rng), vec![2.5]);
        }
    }

    #[test]
    fn same_seed_same_draws() {
        let s = BenchmarkSystem::new(60);
        let (mut a, mut b) = (seeded(5), seeded(5));
        for _ in 0..100 {
            assert_eq!(s.sample_initial(&mut a), s.sample_initial(&mut b));
        }
    }

    #[test]
    fn noise_free_linear_trajectory() {
        let s = LinearGaussianSystem::new(8, 0.9, 2.0, 0.0, 0.0).with_initial(4.0, 0.0);
        let traj = simulate(&s, &MeasurementSchedule::full(8), &mut seeded(1));
        let mut x = 4.0;
        for t in 0..=8 {
            assert_eq!(traj.states[t], vec![x]);
            assert_eq!(traj.outputs[t], vec![x]);
            assert_eq!(traj.observations[&t], vec![2.0 * x]);
            x *= 0.9;
        }
    }

    #[test]
    fn empty_schedule_has_no_observations() {
        let s = BenchmarkSystem::new(60);
        let traj = simulate(&s, &MeasurementSchedule::empty(60), &mut seeded(1));
        assert!(traj.observations.is_empty());
        assert_eq!(traj.states.len(), 61);
        assert_eq!(traj.outputs.len(), 61);
    }

    #[test]
    fn simulate_is_deterministic_and_keyed_by_schedule() {
        let s = BenchmarkSystem::new(60);
        let m = regular_schedule(60, 21).unwrap();
        let a = simulate(&s, &m, &mut seeded(9));
        let b = simulate(&s, &m, &mut seeded(9));
        assert_eq!(a, b);
        assert_eq!(a.observations.keys().copied().collect::<Vec<_>>(), m.times());
        assert_eq!(a.restrict(&m), a.observations);
    }
}
