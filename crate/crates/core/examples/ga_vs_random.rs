//! Genetic algorithm against random trials at the same number of cost
//! evaluations, on a reduced benchmark setup.
//!
//! cargo run --release --example ga_vs_random -- [draws] [particles]

use ipf_schedule::rng::seeded;
use ipf_schedule::{
    estimate_expected_mse, optimize_ga, optimize_random_trials, regular_schedule, BenchmarkSystem,
    GaParams, MseOracle,
};

fn main() -> ipf_schedule::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let draws = args.next().unwrap_or(40);
    let particles = args.next().unwrap_or(100);
    let (horizon, budget) = (60, 21);
    let system = BenchmarkSystem::new(horizon);
    let oracle = MseOracle::new(&system, draws, particles);
    let params = GaParams::default();

    let ga = optimize_ga(&oracle, horizon, budget, &params, &mut seeded(1))?;
    let rt = optimize_random_trials(&oracle, horizon, budget, params.evaluation_budget(), &mut seeded(2))?;

    println!("{:>6} {:>9} {:>9} {:>9} {:>9}", "evals", "ga_min", "ga_mean", "rt_min", "rt_mean");
    for (g, r) in ga.history.iter().zip(&rt.history) {
        println!(
            "{:>6} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
            g.evaluations, g.min_cost, g.mean_cost, r.min_cost, r.mean_cost
        );
    }

    // rescore the winners and the regular schedule on fresh draws
    let regular = regular_schedule(horizon, budget)?;
    for (name, m) in [("ga", &ga.best_schedule), ("random", &rt.best_schedule), ("regular", &regular)] {
        let est = estimate_expected_mse(&system, m, 4 * draws, particles, 99)?;
        println!("{name:<8} {:8.3}  {m}", est.value);
    }
    Ok(())
}
