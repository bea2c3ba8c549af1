//! The four drift estimators on simulated Euler paths.

use fou_lab::estimators::{theta_hat_1, theta_hat_2, theta_hat_3, theta_hat_4};
use fou_lab::fbm::{sample_fbm, HurstParam};
use fou_lab::fou::{euler_path, euler_path_scaled, ModelParams};
use fou_lab::rng::stream;

fn main() -> fou_lab::Result<()> {
    let hurst = HurstParam::new(0.5)?;
    let step = 1.0 / 2000.0;

    // θ = −1 on [0, 200].
    let b = sample_fbm(hurst, step, 400_000, &mut stream(1, 0))?;
    let x = euler_path(&ModelParams::new(-1.0, 1.0, hurst)?, &b)?;
    println!("θ = -1: θ̂1 = {:.4}", theta_hat_1(&x, hurst)?.value);
    let n = 200;
    let coarse = x.subsample(2000 / n as usize)?;
    println!("        θ̂3 (n = {n}, m = 2) = {:.4}", theta_hat_3(&coarse, hurst, n, 2)?.value);

    // θ = 1 on [0, 100]; the scaled path keeps X_t ~ e^100 representable.
    let b = sample_fbm(hurst, step, 200_000, &mut stream(1, 1))?;
    let x = euler_path_scaled(&ModelParams::new(1.0, 1.0, hurst)?, &b)?;
    println!("θ = 1:  θ̂2 = {:.5}", theta_hat_2(&x, hurst)?.value);
    let n = 100;
    let coarse = x.subsample(2000 / n as usize)?;
    let est = theta_hat_4(&coarse, hurst, n, 2)?;
    println!("        θ̂4 (n = {n}, m = 2) = {:.5}", est.value);
    println!("{}", serde_json::to_string(&est).expect("serializable"));
    Ok(())
}
