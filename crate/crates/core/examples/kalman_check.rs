//! Compares the particle filter with the exact Kalman filter on a linear
//! Gaussian system measured intermittently.
//!
//! cargo run --release --example kalman_check

use ipf_schedule::filter::kalman_posterior;
use ipf_schedule::rng::seeded;
use ipf_schedule::{regular_schedule, run_filter, simulate, LinearGaussianSystem};

fn main() -> ipf_schedule::Result<()> {
    let system = LinearGaussianSystem::new(40, 0.95, 1.0, 0.5, 1.0).with_initial(1.0, 2.0);
    let schedule = regular_schedule(40, 9)?;
    let trajectory = simulate(&system, &schedule, &mut seeded(5));
    let kalman = kalman_posterior(&system, &schedule, &trajectory.observations);

    println!("{:>3} {:>9} {:>9} {:>9} {:>9}", "t", "kalman", "sd", "P=100", "P=10000");
    let coarse = run_filter(&system, &schedule, &trajectory.observations, 100, &mut seeded(6));
    let fine = run_filter(&system, &schedule, &trajectory.observations, 10_000, &mut seeded(6));
    for t in 0..=40 {
        println!(
            "{t:>3} {:>9.4} {:>9.4} {:>9.4} {:>9.4}{}",
            kalman.means[t],
            kalman.variances[t].sqrt(),
            coarse.estimates[t][0],
            fine.estimates[t][0],
            if schedule.contains(t) { "  measured" } else { "" }
        );
    }
    for (name, run) in [("P=100", &coarse), ("P=10000", &fine)] {
        let worst = run
            .estimates
            .iter()
            .zip(&kalman.means)
            .map(|(z, m)| (z[0] - m).abs())
            .fold(0.0, f64::max);
        println!("{name:<8} max |pf - kalman| = {worst:.4}");
    }
    Ok(())
}
