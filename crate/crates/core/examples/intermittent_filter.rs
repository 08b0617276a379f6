//! Runs the particle filter on one benchmark trajectory under a regular and a
//! random schedule and prints the estimates next to the true output.
//!
//! cargo run --release --example intermittent_filter

use ipf_schedule::rng::seeded;
use ipf_schedule::{
    random_schedule, regular_schedule, run_filter, simulate, trajectory_mse, BenchmarkSystem,
    MeasurementSchedule,
};

fn main() -> ipf_schedule::Result<()> {
    let (horizon, budget, particles) = (60, 21, 500);
    let system = BenchmarkSystem::new(horizon);
    let regular = regular_schedule(horizon, budget)?;
    let random = random_schedule(horizon, budget, &mut seeded(3));

    // one trajectory measured everywhere, restricted per schedule
    let trajectory = simulate(&system, &MeasurementSchedule::full(horizon), &mut seeded(1));
    let a = run_filter(&system, &regular, &trajectory.restrict(&regular), particles, &mut seeded(2));
    let b = run_filter(&system, &random, &trajectory.restrict(&random), particles, &mut seeded(2));
    if a.is_degenerate() || b.is_degenerate() {
        println!("a filter degenerated; try another seed");
        return Ok(());
    }

    println!("{:>3} {:>9} {:>9} {:>9}", "t", "z", "regular", "random");
    for t in 0..=horizon {
        let mark = |m: &MeasurementSchedule| if m.contains(t) { '*' } else { ' ' };
        println!(
            "{t:>3} {:>9.3} {:>8.3}{} {:>8.3}{}",
            trajectory.outputs[t][0],
            a.estimates[t][0],
            mark(&regular),
            b.estimates[t][0],
            mark(&random),
        );
    }
    println!("MSE regular {:.3}", trajectory_mse(&trajectory.outputs, &a.estimates));
    println!("MSE random  {:.3}", trajectory_mse(&trajectory.outputs, &b.estimates));
    Ok(())
}
