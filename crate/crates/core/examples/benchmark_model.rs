//! Simulates the scalar benchmark system and prints the state, output and
//! measurements under the regular schedule.
//!
//! cargo run --release --example benchmark_model -- [seed]

use ipf_schedule::rng::seeded;
use ipf_schedule::{regular_schedule, simulate, BenchmarkSystem, DynamicalSystem};

fn main() -> ipf_schedule::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let system = BenchmarkSystem::new(60);
    let schedule = regular_schedule(system.horizon(), 21)?;
    let trajectory = simulate(&system, &schedule, &mut seeded(seed));

    println!("{:>3} {:>10} {:>10} {:>10} {:>8}", "t", "x", "z", "y", "std(v)");
    for t in 0..=system.horizon() {
        let y = trajectory
            .observations
            .get(&t)
            .map_or(String::from("-"), |y| format!("{:.4}", y[0]));
        println!(
            "{t:>3} {:>10.4} {:>10.4} {y:>10} {:>8.4}",
            trajectory.states[t][0],
            trajectory.outputs[t][0],
            system.measurement_std(t)
        );
    }
    Ok(())
}
