use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ipf_schedule::experiment::{
    cmd_evaluate, cmd_gain, cmd_optimize, cmd_trace, resolve_schedule, ExperimentConfig,
};

/// Choose measurement times for intermittent particle filtering.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// TOML config file; missing keys take the benchmark defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides the config)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads, 0 = one per core (overrides the config)
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Genetic algorithm vs random trials at equal evaluation budget
    Optimize,
    /// Monte Carlo expected MSE of one schedule
    Evaluate {
        /// `regular`, `t1,t2,...` or `@file`
        schedule: String,
    },
    /// Filter a single simulated trajectory under two schedules
    Trace {
        schedule_a: String,
        schedule_b: String,
        /// Use the same filter seed for both schedules
        #[arg(long)]
        shared_filter_seed: bool,
    },
    /// Paired relative-gain statistics of an optimized vs a reference schedule
    Gain {
        schedule_opt: String,
        #[arg(default_value = "regular")]
        schedule_ref: String,
    },
}

fn run(cli: Cli) -> ipf_schedule::Result<()> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = cli.out {
        config.out_dir = out;
    }
    if let Some(workers) = cli.workers {
        config.workers = workers;
    }
    config.validate()?;
    let schedule = |arg: &str| resolve_schedule(arg, config.horizon, config.budget);

    match cli.command {
        Command::Optimize => {
            let report = cmd_optimize(&config)?;
            println!("ga best:            {} (cost {})", report.ga.best_schedule, report.ga.best_cost);
            println!(
                "random-trials best: {} (cost {})",
                report.random_trials.best_schedule, report.random_trials.best_cost
            );
        }
        Command::Evaluate { schedule: arg } => {
            let m = schedule(&arg)?;
            let est = cmd_evaluate(&config, &m)?;
            println!(
                "expected MSE {} over {} draws ({} degenerate)",
                est.value, est.draws, est.degenerate_draws
            );
        }
        Command::Trace {
            schedule_a,
            schedule_b,
            shared_filter_seed,
        } => {
            let (a, b) = (schedule(&schedule_a)?, schedule(&schedule_b)?);
            let report = cmd_trace(&config, &a, &b, shared_filter_seed)?;
            match report.gain {
                Some(g) => println!("relative gain of A over B: {g}"),
                None => println!("relative gain undefined (a filter degenerated)"),
            }
        }
        Command::Gain {
            schedule_opt,
            schedule_ref,
        } => {
            let (opt, reference) = (schedule(&schedule_opt)?, schedule(&schedule_ref)?);
            let r = cmd_gain(&config, &opt, &reference)?;
            println!(
                "mean gain {}, positive in {} of {} used draws ({} degenerate, {} undefined)",
                r.mean_gain, r.fraction_positive, r.used_draws, r.degenerate_draws, r.undefined_draws
            );
        }
    }
    println!("outputs in {}", config.out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
