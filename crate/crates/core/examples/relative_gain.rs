//! Paired relative-gain study of a schedule against the regular one.
//!
//! cargo run --release --example relative_gain -- [times]
//!
//! `times` is a comma-separated list of 21 times in 0..=60; the default is a
//! schedule found by the optimizer.

use ipf_schedule::experiment::{gain_study, HistogramConfig};
use ipf_schedule::{regular_schedule, BenchmarkSystem, MeasurementSchedule};

const FOUND: &str = "1,2,3,11,12,15,18,20,23,24,25,28,32,33,36,38,44,45,51,54,58";

fn main() -> ipf_schedule::Result<()> {
    let arg = std::env::args().nth(1).unwrap_or_else(|| FOUND.to_string());
    let system = BenchmarkSystem::new(60);
    let candidate = MeasurementSchedule::parse(60, &arg)?;
    let regular = regular_schedule(60, candidate.cardinality())?;
    let histogram = HistogramConfig { bins: 20, ..HistogramConfig::default() };

    let report = gain_study(&system, &candidate, &regular, 2000, 300, &histogram, 1);
    println!("candidate {}", report.schedule_opt);
    println!("regular   {}", report.schedule_ref);
    println!(
        "draws {} used {} degenerate {} undefined {}",
        report.draws, report.used_draws, report.degenerate_draws, report.undefined_draws
    );
    println!("mean gain {:.4}, positive in {:.1}% of draws", report.mean_gain, 100.0 * report.fraction_positive);

    let peak = report.histogram_counts.iter().copied().max().unwrap_or(1).max(1);
    for (i, &count) in report.histogram_counts.iter().enumerate() {
        let bar = "#".repeat(count * 50 / peak);
        println!("{:>6.2} {:>6.2} {count:>5} {bar}", report.histogram_edges[i], report.histogram_edges[i + 1]);
    }
    Ok(())
}
