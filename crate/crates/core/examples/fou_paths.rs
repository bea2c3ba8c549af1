//! Euler paths of the fOU process, the explicit solution on the same driver,
//! and the overflow-free representation for explosive drifts.

use fou_lab::fbm::{sample_fbm, HurstParam};
use fou_lab::fou::{euler_path, euler_path_scaled, solution_path, ModelParams};
use fou_lab::rng::stream;

fn main() -> fou_lab::Result<()> {
    let hurst = HurstParam::new(0.7)?;
    let driver = sample_fbm(hurst, 1e-3, 20_000, &mut stream(3, 0))?;
    for theta in [-1.0, 0.0, 0.5] {
        let params = ModelParams::new(theta, 1.0, hurst)?;
        let euler = euler_path(&params, &driver)?;
        let exact = solution_path(&params, &driver)?;
        println!(
            "θ = {theta:>4}: X_20 Euler {:>14.6e}, solution {:>14.6e}",
            euler.last(),
            exact.last()
        );
    }

    // θ = 1 over [0, 1000]: X_T is around e^1000, far beyond f64.
    let long = sample_fbm(hurst, 0.01, 100_000, &mut stream(3, 1))?;
    let params = ModelParams::new(1.0, 1.0, hurst)?;
    println!("plain Euler: {}", euler_path(&params, &long).unwrap_err());
    let scaled = euler_path_scaled(&params, &long)?;
    println!(
        "scaled Euler: ln|X_1000| = {:.3} (drift alone gives {:.3})",
        scaled.ln_abs(scaled.len() - 1),
        100_000.0 * (1.0f64 + 0.01).ln()
    );
    Ok(())
}
