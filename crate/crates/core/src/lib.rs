//! A priori selection of measurement times for particle filtering.
//!
//! A discrete-time stochastic nonlinear system is observed at only `N` of the
//! `T + 1` time steps of a finite horizon. This crate searches for the set of
//! measurement times minimizing the expected filtering mean squared error by
//! nesting three layers:
//!
//! * [`filter`]: a sampling-importance-resampling particle filter that skips
//!   its correction step at unmeasured times,
//! * [`estimator`]: a Monte Carlo estimate of the expected filtering MSE of a
//!   schedule,
//! * [`optimizer`]: a genetic algorithm over fixed-weight bitstrings, plus a
//!   random-trials baseline.
//!
//! [`model`] holds the system abstraction and the two concrete systems,
//! [`schedule`] the measurement-time sets, and [`experiment`] the
//! configuration-driven commands used by the `ipf-schedule` binary.

pub mod error;
pub mod estimator;
pub mod experiment;
pub mod filter;
pub mod model;
pub mod optimizer;
pub mod resample;
pub mod rng;
pub mod schedule;

pub use error::{Error, Result};
pub use estimator::{estimate_expected_mse, relative_gain, trajectory_mse, CostEstimate, GainSample};
pub use filter::{run_filter, run_kalman_oracle, FilterResult, ParticleEnsemble};
pub use model::{simulate, BenchmarkSystem, DynamicalSystem, LinearGaussianSystem, Trajectory};
pub use optimizer::{
    optimize_ga, optimize_random_trials, CostOracle, GaParams, MseOracle, OptimizationResult,
};
pub use rng::SimRng;
pub use schedule::{random_schedule, regular_schedule, MeasurementSchedule, ScheduleBits};
