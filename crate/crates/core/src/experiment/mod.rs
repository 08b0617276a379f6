//! Configuration-driven experiments behind the `ipf-schedule` binary.
//!
//! Each command writes CSV files with a header row plus a TOML summary
//! (config echo, seeds, schedules, aggregates) into the output directory.
//! Random streams hang off the master seed by a fixed path, and parallel
//! results are gathered in index order, so output files are byte-identical
//! for a given config whatever the worker count.

mod config;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

pub use config::{ExperimentConfig, HistogramConfig, SystemConfig};

use crate::error::{Error, Result};
use crate::estimator::{relative_gain, trajectory_mse, CostEstimate};
use crate::filter::{run_filter, FilterResult};
use crate::model::{simulate, DynamicalSystem};
use crate::optimizer::{optimize_ga, optimize_random_trials, MseOracle, OptimizationResult};
use crate::rng::{derive_seed, substream};
use crate::schedule::{regular_schedule, MeasurementSchedule};

// stream indices under the master seed
const STREAM_GA: u64 = 1;
const STREAM_RANDOM_TRIALS: u64 = 2;
const STREAM_EVALUATE: u64 = 3;
const STREAM_TRACE_TRAJECTORY: u64 = 4;
const STREAM_TRACE_FILTER_A: u64 = 5;
const STREAM_TRACE_FILTER_B: u64 = 6;
const STREAM_GAIN: u64 = 7;

/// Resolves a schedule argument: `regular`, a comma-separated list of times,
/// or `@path` to a file holding such a list. The result must have exactly
/// `budget` times.
pub fn resolve_schedule(arg: &str, horizon: usize, budget: usize) -> Result<MeasurementSchedule> {
    let arg = arg.trim();
    let schedule = if arg == "regular" {
        regular_schedule(horizon, budget)?
    } else if let Some(path) = arg.strip_prefix('@') {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        MeasurementSchedule::parse(horizon, &text)?
    } else {
        MeasurementSchedule::parse(horizon, arg)?
    };
    if schedule.cardinality() != budget {
        return Err(Error::InvalidSchedule(format!(
            "{arg:?} has {} times, the budget is {budget}",
            schedule.cardinality()
        )));
    }
    Ok(schedule)
}

/// Runs `f` on a pool of `workers` threads (0 = one per core).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: PathBuf, text: &str) -> Result<()> {
    fs::write(&path, text).map_err(|e| Error::io(path, e))
}

fn write_summary<T: Serialize>(path: PathBuf, summary: &T) -> Result<()> {
    let text = toml::to_string(summary).map_err(|e| Error::Config(format!("summary: {e}")))?;
    write_text(path, &text)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(Error::from)
}

fn fmt_vector(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

#[derive(Serialize)]
struct ConvergenceRow {
    evaluations: usize,
    ga_min: f64,
    ga_mean: f64,
    rt_min: f64,
    rt_mean: f64,
}

#[derive(Debug)]
pub struct OptimizeReport {
    pub ga: OptimizationResult,
    pub random_trials: OptimizationResult,
}

#[derive(Serialize)]
struct OptimizeSummary<'a> {
    command: &'static str,
    ga_best_schedule: String,
    ga_best_cost: f64,
    ga_evaluations: usize,
    rt_best_schedule: String,
    rt_best_cost: f64,
    rt_evaluations: usize,
    config: &'a ExperimentConfig,
}

/// GA and random trials at the same evaluation budget.
///
/// Writes `convergence.csv` (one row per GA generation: evaluations so far,
/// GA generation min/mean cost, random-trials running min/mean at the same
/// count), `best_schedule.txt` and `optimize_summary.toml`.
pub fn cmd_optimize(config: &ExperimentConfig) -> Result<OptimizeReport> {
    config.validate()?;
    let system = config.build_system()?;
    let mut oracle = MseOracle::new(system.as_ref(), config.draws, config.particles);
    if config.common_random_numbers {
        oracle.common_random_numbers = Some(derive_seed(config.seed, STREAM_EVALUATE));
    }
    let budget_evals = config.ga.evaluation_budget();

    let (ga, random_trials) = with_workers(config.workers, || -> Result<_> {
        let ga = optimize_ga(
            &oracle,
            config.horizon,
            config.budget,
            &config.ga,
            &mut substream(config.seed, STREAM_GA),
        )?;
        let rt = optimize_random_trials(
            &oracle,
            config.horizon,
            config.budget,
            budget_evals,
            &mut substream(config.seed, STREAM_RANDOM_TRIALS),
        )?;
        Ok((ga, rt))
    })??;

    let out = &config.out_dir;
    prepare_out_dir(out)?;
    let mut csv = csv_writer(&out.join("convergence.csv"))?;
    for point in &ga.history {
        let rt = random_trials.history[point.evaluations - 1];
        csv.serialize(ConvergenceRow {
            evaluations: point.evaluations,
            ga_min: point.min_cost,
            ga_mean: point.mean_cost,
            rt_min: rt.min_cost,
            rt_mean: rt.mean_cost,
        })?;
    }
    csv.flush().map_err(|e| Error::io(out.join("convergence.csv"), e))?;
    write_text(out.join("best_schedule.txt"), &format!("{}\n", ga.best_schedule))?;
    write_summary(
        out.join("optimize_summary.toml"),
        &OptimizeSummary {
            command: "optimize",
            ga_best_schedule: ga.best_schedule.to_string(),
            ga_best_cost: ga.best_cost,
            ga_evaluations: ga.evaluations_used,
            rt_best_schedule: random_trials.best_schedule.to_string(),
            rt_best_cost: random_trials.best_cost,
            rt_evaluations: random_trials.evaluations_used,
            config,
        },
    )?;
    Ok(OptimizeReport { ga, random_trials })
}

#[derive(Serialize)]
struct EvaluateRow {
    draw: usize,
    mse: Option<f64>,
}

#[derive(Serialize)]
struct EvaluateSummary<'a> {
    command: &'static str,
    schedule: String,
    expected_mse: f64,
    draws: usize,
    degenerate_draws: usize,
    estimate_seed: u64,
    config: &'a ExperimentConfig,
}

/// `Ê_MSE` of a single schedule; writes `evaluate_draws.csv` and
/// `evaluate_summary.toml`.
pub fn cmd_evaluate(config: &ExperimentConfig, schedule: &MeasurementSchedule) -> Result<CostEstimate> {
    config.validate()?;
    let system = config.build_system()?;
    let seed = derive_seed(config.seed, STREAM_EVALUATE);
    let estimate = with_workers(config.workers, || {
        crate::estimator::estimate_expected_mse(system.as_ref(), schedule, config.draws, config.particles, seed)
    })??;

    let out = &config.out_dir;
    prepare_out_dir(out)?;
    let path = out.join("evaluate_draws.csv");
    let mut csv = csv_writer(&path)?;
    for (draw, mse) in estimate.per_draw_mse.iter().enumerate() {
        csv.serialize(EvaluateRow { draw, mse: *mse })?;
    }
    csv.flush().map_err(|e| Error::io(path, e))?;
    write_summary(
        out.join("evaluate_summary.toml"),
        &EvaluateSummary {
            command: "evaluate",
            schedule: schedule.to_string(),
            expected_mse: estimate.value,
            draws: estimate.draws,
            degenerate_draws: estimate.degenerate_draws,
            estimate_seed: seed,
            config,
        },
    )?;
    Ok(estimate)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: usize,
    pub z: String,
    pub zhat_a: String,
    pub zhat_b: String,
    pub measured_a: bool,
    pub measured_b: bool,
    pub degenerate_a: bool,
    pub degenerate_b: bool,
}

#[derive(Clone, Debug)]
pub struct TraceReport {
    pub rows: Vec<TraceRow>,
    pub mse_a: Option<f64>,
    pub mse_b: Option<f64>,
    /// Gain of schedule A relative to reference B; `None` if either filter
    /// degenerated.
    pub gain: Option<f64>,
}

#[derive(Serialize)]
struct TraceSummary<'a> {
    command: &'static str,
    schedule_a: String,
    schedule_b: String,
    mse_a: Option<f64>,
    mse_b: Option<f64>,
    gain: Option<f64>,
    degenerate_at_a: Option<usize>,
    degenerate_at_b: Option<usize>,
    filter_seed_a: u64,
    filter_seed_b: u64,
    config: &'a ExperimentConfig,
}

/// Filters one simulated trajectory under two schedules; writes `trace.csv`
/// and `trace_summary.toml`.
///
/// Both schedules see the same measurements at shared times. The filters use
/// independent seeds unless `shared_filter_seed` is set.
pub fn cmd_trace(
    config: &ExperimentConfig,
    schedule_a: &MeasurementSchedule,
    schedule_b: &MeasurementSchedule,
    shared_filter_seed: bool,
) -> Result<TraceReport> {
    config.validate()?;
    let system = config.build_system()?;
    let system = system.as_ref();
    let full = MeasurementSchedule::full(config.horizon);
    let trajectory = simulate(system, &full, &mut substream(config.seed, STREAM_TRACE_TRAJECTORY));

    let seed_a = derive_seed(config.seed, STREAM_TRACE_FILTER_A);
    let seed_b = if shared_filter_seed {
        seed_a
    } else {
        derive_seed(config.seed, STREAM_TRACE_FILTER_B)
    };
    let run = |schedule: &MeasurementSchedule, seed: u64| {
        run_filter(
            system,
            schedule,
            &trajectory.restrict(schedule),
            config.particles,
            &mut crate::rng::seeded(seed),
        )
    };
    let result_a = run(schedule_a, seed_a);
    let result_b = run(schedule_b, seed_b);

    let mse = |r: &FilterResult| (!r.is_degenerate()).then(|| trajectory_mse(&trajectory.outputs, &r.estimates));
    let (mse_a, mse_b) = (mse(&result_a), mse(&result_b));
    let gain = match (mse_a, mse_b) {
        (Some(a), Some(b)) => relative_gain(b, a).ok(),
        _ => None,
    };

    let estimate_cell = |r: &FilterResult, t: usize| r.estimates.get(t).map(|v| fmt_vector(v)).unwrap_or_default();
    let degenerate = |r: &FilterResult, t: usize| r.degenerate_at.is_some_and(|d| t >= d);
    let rows: Vec<TraceRow> = (0..=config.horizon)
        .map(|t| TraceRow {
            t,
            z: fmt_vector(&trajectory.outputs[t]),
            zhat_a: estimate_cell(&result_a, t),
            zhat_b: estimate_cell(&result_b, t),
            measured_a: schedule_a.contains(t),
            measured_b: schedule_b.contains(t),
            degenerate_a: degenerate(&result_a, t),
            degenerate_b: degenerate(&result_b, t),
        })
        .collect();

    let out = &config.out_dir;
    prepare_out_dir(out)?;
    let path = out.join("trace.csv");
    let mut csv = csv_writer(&path)?;
    for row in &rows {
        csv.serialize(row)?;
    }
    csv.flush().map_err(|e| Error::io(path, e))?;
    write_summary(
        out.join("trace_summary.toml"),
        &TraceSummary {
            command: "trace",
            schedule_a: schedule_a.to_string(),
            schedule_b: schedule_b.to_string(),
            mse_a,
            mse_b,
            gain,
            degenerate_at_a: result_a.degenerate_at,
            degenerate_at_b: result_b.degenerate_at,
            filter_seed_a: seed_a,
            filter_seed_b: seed_b,
            config,
        },
    )?;
    Ok(TraceReport {
        rows,
        mse_a,
        mse_b,
        gain,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DrawStatus {
    Ok,
    Degenerate,
    /// Reference MSE of zero: the gain is undefined.
    Undefined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GainDraw {
    pub draw: usize,
    pub status: DrawStatus,
    pub mse_ref: Option<f64>,
    pub mse_opt: Option<f64>,
    pub gain: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GainReport {
    pub schedule_opt: String,
    pub schedule_ref: String,
    pub draws: usize,
    pub used_draws: usize,
    pub degenerate_draws: usize,
    pub undefined_draws: usize,
    pub mean_gain: f64,
    pub fraction_positive: f64,
    pub histogram_edges: Vec<f64>,
    pub histogram_counts: Vec<usize>,
    #[serde(skip)]
    pub per_draw: Vec<GainDraw>,
}

impl GainReport {
    pub fn gains(&self) -> impl Iterator<Item = f64> + '_ {
        self.per_draw.iter().filter_map(|d| d.gain)
    }
}

/// Paired gain study on an explicit system: every draw simulates one
/// trajectory and filters it under both schedules with the same filter seed.
/// Draws where either filter degenerates, or where the reference MSE is zero,
/// are excluded from the statistics and counted.
pub fn gain_study<S: DynamicalSystem + ?Sized>(
    system: &S,
    schedule_opt: &MeasurementSchedule,
    schedule_ref: &MeasurementSchedule,
    draws: usize,
    particles: usize,
    histogram: &HistogramConfig,
    seed: u64,
) -> GainReport {
    let full = MeasurementSchedule::full(system.horizon());
    let per_draw: Vec<GainDraw> = (0..draws)
        .into_par_iter()
        .map(|draw| {
            let trajectory = simulate(system, &full, &mut substream(seed, 2 * draw as u64));
            let filter_rng = substream(seed, 2 * draw as u64 + 1);
            let mse = |schedule: &MeasurementSchedule| {
                let r = run_filter(
                    system,
                    schedule,
                    &trajectory.restrict(schedule),
                    particles,
                    &mut filter_rng.clone(),
                );
                (!r.is_degenerate()).then(|| trajectory_mse(&trajectory.outputs, &r.estimates))
            };
            let (mse_ref, mse_opt) = (mse(schedule_ref), mse(schedule_opt));
            let (status, gain) = match (mse_ref, mse_opt) {
                (Some(r), Some(o)) => match relative_gain(r, o) {
                    Ok(g) => (DrawStatus::Ok, Some(g)),
                    Err(_) => (DrawStatus::Undefined, None),
                },
                _ => (DrawStatus::Degenerate, None),
            };
            GainDraw {
                draw,
                status,
                mse_ref,
                mse_opt,
                gain,
            }
        })
        .collect();

    let gains: Vec<f64> = per_draw.iter().filter_map(|d| d.gain).collect();
    let used = gains.len();
    let count_status = |s| per_draw.iter().filter(|d| d.status == s).count();
    let (mean_gain, fraction_positive) = if used > 0 {
        (
            gains.iter().sum::<f64>() / used as f64,
            gains.iter().filter(|&&g| g > 0.0).count() as f64 / used as f64,
        )
    } else {
        (f64::NAN, f64::NAN)
    };

    let width = (histogram.max - histogram.min) / histogram.bins as f64;
    let histogram_edges: Vec<f64> = (0..=histogram.bins)
        .map(|i| histogram.min + i as f64 * width)
        .collect();
    let mut histogram_counts = vec![0usize; histogram.bins];
    for g in &gains {
        // out-of-range gains go to the end bins
        let bin = ((g - histogram.min) / width).floor().clamp(0.0, (histogram.bins - 1) as f64);
        histogram_counts[bin as usize] += 1;
    }

    GainReport {
        schedule_opt: schedule_opt.to_string(),
        schedule_ref: schedule_ref.to_string(),
        draws,
        used_draws: used,
        degenerate_draws: count_status(DrawStatus::Degenerate),
        undefined_draws: count_status(DrawStatus::Undefined),
        mean_gain,
        fraction_positive,
        histogram_edges,
        histogram_counts,
        per_draw,
    }
}

#[derive(Serialize)]
struct HistogramRow {
    bin_low: f64,
    bin_high: f64,
    count: usize,
}

#[derive(Serialize)]
struct GainSummary<'a> {
    command: &'static str,
    gain_seed: u64,
    excluded_draw_policy: &'static str,
    report: &'a GainReport,
    config: &'a ExperimentConfig,
}

/// [`gain_study`] over `config.gain_draws` draws of the configured system;
/// writes `gain_draws.csv`, `gain_histogram.csv` and `gain_summary.toml`.
pub fn cmd_gain(
    config: &ExperimentConfig,
    schedule_opt: &MeasurementSchedule,
    schedule_ref: &MeasurementSchedule,
) -> Result<GainReport> {
    config.validate()?;
    let system = config.build_system()?;
    let seed = derive_seed(config.seed, STREAM_GAIN);
    let report = with_workers(config.workers, || {
        gain_study(
            system.as_ref(),
            schedule_opt,
            schedule_ref,
            config.gain_draws,
            config.particles,
            &config.histogram,
            seed,
        )
    })?;

    let out = &config.out_dir;
    prepare_out_dir(out)?;
    let path = out.join("gain_draws.csv");
    let mut csv = csv_writer(&path)?;
    for row in &report.per_draw {
        csv.serialize(row)?;
    }
    csv.flush().map_err(|e| Error::io(path, e))?;

    let path = out.join("gain_histogram.csv");
    let mut csv = csv_writer(&path)?;
    for (i, &count) in report.histogram_counts.iter().enumerate() {
        csv.serialize(HistogramRow {
            bin_low: report.histogram_edges[i],
            bin_high: report.histogram_edges[i + 1],
            count,
        })?;
    }
    csv.flush().map_err(|e| Error::io(path, e))?;

    write_summary(
        out.join("gain_summary.toml"),
        &GainSummary {
            command: "gain",
            gain_seed: seed,
            excluded_draw_policy: "draws where either filter degenerates or the reference MSE is zero are excluded",
            report: &report,
            config,
        },
    )?;
    Ok(report)
}
