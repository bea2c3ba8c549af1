//! Testing H0: θ ≥ θ0 against H1: θ ≤ 0, with the guard horizon and the
//! exact power curve.

use fou_lab::fbm::HurstParam;
use fou_lab::marginals::Probability;
use fou_lab::sign_test::{find_t0_tilde, power_alg2, test_theta0_drift, SearchConfig};

fn main() -> fou_lab::Result<()> {
    let alpha = Probability::new(0.05)?;
    let hurst = HurstParam::new(0.7)?;
    for theta0 in [0.1, 0.05, 0.01] {
        let guard = find_t0_tilde(alpha, theta0, 1.0, hurst, &SearchConfig::default())?;
        println!("θ0 = {theta0}: applicable for t > {guard:.2}");
    }
    // θ0 = 0 pushes the guard far out; the extended scan reaches it.
    let guard = find_t0_tilde(alpha, 0.0, 1.0, hurst, &SearchConfig::extended())?;
    println!("θ0 = 0: applicable for t > {guard:.1}");

    let t = 45.0;
    for theta1 in [-0.2, -0.1, 0.0, 0.1] {
        let p = power_alg2(theta1, 0.1, 1.0, t, hurst, alpha)?;
        println!("rejection probability at θ = {theta1:>4}: {:.4}", p.value());
    }
    let d = test_theta0_drift(2.5, t, 1.0, hurst, alpha, 0.1)?;
    println!("X_45 = 2.5 -> g = {:.4}, {:?}", d.g_value.value(), d.verdict);
    Ok(())
}
