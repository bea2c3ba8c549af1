//! Samples fractional Brownian motion and compares the empirical variance of
//! `B_1` with its exact value 1, then round-trips a path through the binary format.

use fou_lab::fbm::{fbm_covariance, FbmGenerator, FbmMethod, HurstParam};
use fou_lab::rng::stream;

fn main() -> fou_lab::Result<()> {
    let reps = 2000;
    for h in [0.2, 0.5, 0.8] {
        let hurst = HurstParam::new(h)?;
        let generator = FbmGenerator::new(hurst, 1.0 / 256.0, 256)?;
        let mut rng = stream(7, 0);
        let mut sum_sq = 0.0;
        let mut sum_cross = 0.0;
        for _ in 0..reps / 2 {
            let (a, b) = generator.sample_pair(&mut rng);
            for p in [a, b] {
                sum_sq += p.last().powi(2);
                sum_cross += p.values()[128] * p.last();
            }
        }
        println!(
            "H = {h}: Var B_1 ≈ {:.3} (exact 1), Cov(B_0.5, B_1) ≈ {:.3} (exact {:.3}), method {:?}",
            sum_sq / reps as f64,
            sum_cross / reps as f64,
            fbm_covariance(hurst, 0.5, 1.0),
            generator.method()
        );
    }

    // Hosking's recursion gives the same law and serves as a fallback.
    let hosking = FbmGenerator::with_method(HurstParam::new(0.3)?, 0.01, 100, FbmMethod::Hosking)?;
    let path = hosking.sample(&mut stream(7, 1));
    let mut bytes = Vec::new();
    path.write_binary(&mut bytes)?;
    let back = fou_lab::SamplePath::read_binary(bytes.as_slice())?;
    println!("FOUPATH1 round trip: {} bytes, identical = {}", bytes.len(), back == path);
    Ok(())
}
