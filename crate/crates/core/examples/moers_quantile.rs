//! Monte Carlo quantile of the Moers limit law and the resulting test.
//!
//! Usage: `moers_quantile [replications] [grid_points]` (defaults 20000, 10000).

use fou_lab::estimators::{moers_limit_quantile, moers_statistic};
use fou_lab::fbm::{sample_fbm, HurstParam};
use fou_lab::fou::{euler_path, ModelParams};
use fou_lab::marginals::Probability;
use fou_lab::rng::stream;

fn main() -> fou_lab::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let reps = args.next().unwrap_or(20_000);
    let grid = args.next().unwrap_or(10_000);
    let hurst = HurstParam::new(0.7)?;
    let psi = moers_limit_quantile(hurst, Probability::new(0.95)?, reps, grid, 42)?;
    println!("ψ_0.95 ≈ {psi:.6} ({reps} paths, {grid} grid points)");

    let t = 40.0;
    for theta in [-0.05, 0.0, 0.1] {
        let b = sample_fbm(hurst, 1.0 / 2000.0, 80_000, &mut stream(8, 0))?;
        let x = euler_path(&ModelParams::new(theta, 1.0, hurst)?, &b)?;
        let stat = t * moers_statistic(&x, hurst)?;
        println!("θ = {theta:>5}: t·statistic = {stat:>9.4} -> reject = {}", stat > psi);
    }
    Ok(())
}
