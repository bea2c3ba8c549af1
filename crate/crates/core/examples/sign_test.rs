//! Testing H0: θ ≤ 0 against H1: θ > 0 from a single observation.

use fou_lab::fbm::HurstParam;
use fou_lab::fou::{sample_marginal_exact, ModelParams};
use fou_lab::marginals::Probability;
use fou_lab::rng::stream;
use fou_lab::sign_test::{find_t0, power_alg1, PositiveDriftTest, SearchConfig};

fn main() -> fou_lab::Result<()> {
    let alpha = Probability::new(0.05)?;
    let search = SearchConfig::default();
    for h in [0.1, 0.5, 0.9] {
        let t0 = find_t0(alpha, 1.0, HurstParam::new(h)?, &search)?;
        println!("H = {h}: the test applies for t > t0 = {t0:.4}");
    }

    let hurst = HurstParam::new(0.3)?;
    let t = 40.0;
    let test = PositiveDriftTest::new(1.0, hurst, alpha, t, &search)?;
    println!("\nt = {t}: threshold c_t = {:.6}", test.threshold()?.threshold_c);
    let mut rng = stream(5, 0);
    for theta in [-0.05, 0.0, 0.05, 0.1] {
        let x_t = sample_marginal_exact(&ModelParams::new(theta, 1.0, hurst)?, t, &mut rng)?;
        let d = test.decide(x_t)?;
        println!(
            "θ = {theta:>5}: X_t = {x_t:>12.4e}, Z = {:.4}, g = {:.4} -> {:?}",
            d.statistic_z,
            d.g_value.value(),
            d.verdict
        );
    }
    for theta in [0.05, 0.1, 0.2] {
        println!("power at θ = {theta}: {:.4}", power_alg1(theta, 1.0, t, hurst, alpha)?.value());
    }
    Ok(())
}
