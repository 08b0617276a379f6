//! Monte Carlo expected filtering MSE of the regular schedule against a few
//! random schedules on the benchmark model.
//!
//! cargo run --release --example expected_mse

use std::time::Instant;

use ipf_schedule::rng::seeded;
use ipf_schedule::{estimate_expected_mse, random_schedule, regular_schedule, BenchmarkSystem};

fn main() -> ipf_schedule::Result<()> {
    let (horizon, budget, draws, particles) = (60, 21, 200, 200);
    let system = BenchmarkSystem::new(horizon);

    let start = Instant::now();
    let regular = regular_schedule(horizon, budget)?;
    let est = estimate_expected_mse(&system, &regular, draws, particles, 1)?;
    println!(
        "regular  {:<70} Ê_MSE = {:8.3}  ({} degenerate draws, {:.2?})",
        regular.to_string(),
        est.value,
        est.degenerate_draws,
        start.elapsed()
    );

    let mut rng = seeded(2);
    for i in 0..5 {
        let m = random_schedule(horizon, budget, &mut rng);
        let est = estimate_expected_mse(&system, &m, draws, particles, 10 + i)?;
        println!("random   {:<70} Ê_MSE = {:8.3}", m.to_string(), est.value);
    }
    Ok(())
}
