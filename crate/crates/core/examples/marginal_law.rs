//! The Gaussian law of X_t and the cdf g(θ, x0, t, c) of the test statistic.

use fou_lab::fbm::HurstParam;
use fou_lab::marginals::{asymptotic_variance, g_cdf, log_variance_v, variance_v, variance_v_dtheta};

fn main() -> fou_lab::Result<()> {
    let hurst = HurstParam::new(0.3)?;
    println!("{:>6} {:>6} {:>14} {:>14}", "theta", "t", "v(theta,t)", "dv/dtheta");
    for theta in [-1.0, -0.1, 0.0, 0.1] {
        for t in [1.0, 10.0, 100.0] {
            println!(
                "{theta:>6} {t:>6} {:>14.6e} {:>14.6e}",
                variance_v(theta, t, hurst)?,
                variance_v_dtheta(theta, t, hurst)?
            );
        }
    }
    println!("v(-1, ∞) = HΓ(2H) = {:.6}", asymptotic_variance(-1.0, hurst)?);
    println!("ln v(2, 1000) = {:.3} (v itself overflows)", log_variance_v(2.0, 1000.0, hurst)?);

    println!("\ng(θ, 1, 50, c) for H = 0.3:");
    for theta in [-0.2, 0.0, 0.05, 0.2] {
        let row: Vec<String> = [0.1, 0.3, 0.5, 0.9]
            .iter()
            .map(|&c| g_cdf(theta, 1.0, 50.0, c, hurst).map(|p| format!("{:.4}", p.value())))
            .collect::<Result<_, _>>()?;
        println!("  θ = {theta:>5}: {}", row.join("  "));
    }
    Ok(())
}
