//! Strongly consistent drift estimators and the Moers statistic.
//!
//! Every time integral is a left-endpoint Riemann sum on the path grid,
//! `∫₀ᵀ X² dt ≈ h Σ_{k<N} X_k²`, which is also the sum the discrete
//! estimators are defined with. All arithmetic is done on logarithms so that
//! explosive paths whose values overflow `f64` can still be estimated.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbm::{FbmGenerator, HurstParam, SamplePath};
use crate::fou::ScaledPath;
use crate::marginals::{h_gamma_2h, Probability};
use crate::rng::stream;

/// Minimum replication count accepted by [`moers_limit_quantile`].
pub const MIN_QUANTILE_REPLICATIONS: usize = 1000;

/// A trajectory on a uniform grid starting at time 0.
pub trait Trajectory {
    fn step(&self) -> f64;

    fn point_count(&self) -> usize;

    /// `ln |X_k|`, `-inf` at zero.
    fn ln_abs(&self, k: usize) -> f64;

    /// `ln Σ_{k<end} X_k²`.
    fn ln_sum_squares(&self, end: usize) -> f64;

    fn horizon(&self) -> f64 {
        (self.point_count() - 1) as f64 * self.step()
    }
}

impl Trajectory for SamplePath {
    fn step(&self) -> f64 {
        SamplePath::step(self)
    }

    fn point_count(&self) -> usize {
        self.len()
    }

    fn ln_abs(&self, k: usize) -> f64 {
        self.values()[k].abs().ln()
    }

    fn ln_sum_squares(&self, end: usize) -> f64 {
        let xs = &self.values()[..end];
        let scale = xs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if scale == 0.0 {
            return f64::NEG_INFINITY;
        }
        let sum: f64 = xs.iter().map(|x| (x / scale) * (x / scale)).sum();
        2.0 * scale.ln() + sum.ln()
    }
}

impl Trajectory for ScaledPath {
    fn step(&self) -> f64 {
        ScaledPath::step(self)
    }

    fn point_count(&self) -> usize {
        self.len()
    }

    fn ln_abs(&self, k: usize) -> f64 {
        ScaledPath::ln_abs(self, k)
    }

    fn ln_sum_squares(&self, end: usize) -> f64 {
        if end == 0 {
            return f64::NEG_INFINITY;
        }
        let w = &self.mantissa()[..end];
        let lg = self.ln_growth();
        if lg == 0.0 {
            let sum: f64 = w.iter().map(|x| x * x).sum();
            return sum.ln();
        }
        // Σ W_k² g^{2k} = g^{2(end−1)} Σ W_k² g^{−2(end−1−k)}, by Horner's rule.
        let shrink = (-2.0 * lg).exp();
        let sum = w.iter().fold(0.0, |acc, x| acc * shrink + x * x);
        sum.ln() + 2.0 * (end - 1) as f64 * lg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimatorId {
    Erg1,
    NonErg2,
    DiscErg3,
    DiscNonErg4,
    Moers,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimator_id: EstimatorId,
    pub value: f64,
    #[serde(rename = "horizon_T")]
    pub horizon_t: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m_exponent: Option<u32>,
    pub h_step: f64,
}

/// `ln ∫₀ᵀ X² dt` by the left-endpoint rule.
fn ln_energy<P: Trajectory + ?Sized>(path: &P) -> Result<f64> {
    check_length(path)?;
    let n = path.point_count() - 1;
    let ln_sum = path.ln_sum_squares(n);
    if ln_sum == f64::NEG_INFINITY {
        return Err(Error::Degenerate("∫X² dt vanishes on this path".into()));
    }
    if ln_sum.is_nan() {
        return Err(Error::Degenerate("path contains non-finite values".into()));
    }
    Ok(path.step().ln() + ln_sum)
}

fn check_length<P: Trajectory + ?Sized>(path: &P) -> Result<()> {
    if path.point_count() < 2 {
        return Err(Error::Shape(format!(
            "estimators need at least 2 points, got {}",
            path.point_count()
        )));
    }
    Ok(())
}

/// `−((1/(HΓ(2H)T)) e^{ln_energy})^{−1/(2H)}`.
fn ergodic_value(ln_energy: f64, horizon: f64, hurst: HurstParam) -> f64 {
    let ln_mean = ln_energy - horizon.ln() - h_gamma_2h(hurst).ln();
    -(-ln_mean / hurst.two_h()).exp()
}

/// `X_T² / (2 e^{ln_energy})`.
fn non_ergodic_value(ln_end: f64, ln_energy: f64) -> f64 {
    (2.0 * ln_end - std::f64::consts::LN_2 - ln_energy).exp()
}

/// Estimator for θ < 0 from the ergodic mean of `X²`.
pub fn theta_hat_1<P: Trajectory + ?Sized>(path: &P, hurst: HurstParam) -> Result<EstimateReport> {
    let ln_e = ln_energy(path)?;
    let horizon = path.horizon();
    Ok(EstimateReport {
        estimator_id: EstimatorId::Erg1,
        value: ergodic_value(ln_e, horizon, hurst),
        horizon_t: horizon,
        m_exponent: None,
        h_step: path.step(),
    })
}

/// Estimator for θ > 0: `X_T² / (2∫₀ᵀ X² dt)`.
pub fn theta_hat_2<P: Trajectory + ?Sized>(path: &P, _hurst: HurstParam) -> Result<EstimateReport> {
    let ln_e = ln_energy(path)?;
    let last = path.point_count() - 1;
    Ok(EstimateReport {
        estimator_id: EstimatorId::NonErg2,
        value: non_ergodic_value(path.ln_abs(last), ln_e),
        horizon_t: path.horizon(),
        m_exponent: None,
        h_step: path.step(),
    })
}

/// Number of points `n^m + 1` of the grid `k/n`, `0 ≤ k ≤ n^m`.
pub fn discrete_point_count(n: u64, m: u32) -> Result<usize> {
    if n < 1 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    if m < 2 {
        return Err(Error::invalid("m", format!("must exceed 1, got {m}")));
    }
    n.checked_pow(m)
        .and_then(|p| usize::try_from(p).ok())
        .and_then(|p| p.checked_add(1))
        .ok_or_else(|| Error::invalid("n", format!("n^m overflows for n = {n}, m = {m}")))
}

fn check_discrete_grid<P: Trajectory + ?Sized>(path: &P, n: u64, m: u32) -> Result<()> {
    let points = discrete_point_count(n, m)?;
    if path.point_count() != points {
        return Err(Error::Shape(format!(
            "grid for n = {n}, m = {m} needs {points} points, path has {}",
            path.point_count()
        )));
    }
    let expect = 1.0 / n as f64;
    if ((path.step() - expect) / expect).abs() > 1e-9 {
        return Err(Error::Shape(format!(
            "grid for n = {n} needs step 1/{n}, path step is {}",
            path.step()
        )));
    }
    Ok(())
}

/// Discrete ergodic estimator on the grid `k/n`, `0 ≤ k ≤ n^m`.
pub fn theta_hat_3<P: Trajectory + ?Sized>(
    path: &P,
    hurst: HurstParam,
    n: u64,
    m: u32,
) -> Result<EstimateReport> {
    check_discrete_grid(path, n, m)?;
    let points = path.point_count() - 1;
    let ln_sum = path.ln_sum_squares(points);
    if ln_sum == f64::NEG_INFINITY || ln_sum.is_nan() {
        return Err(Error::Degenerate("ΣX² vanishes or is not finite".into()));
    }
    // (1/n^m) Σ X² is the same ergodic mean with T = n^{m−1}, h = 1/n.
    let ln_mean = ln_sum - (points as f64).ln();
    Ok(EstimateReport {
        estimator_id: EstimatorId::DiscErg3,
        value: ergodic_value(ln_mean, 1.0, hurst),
        horizon_t: path.horizon(),
        m_exponent: Some(m),
        h_step: path.step(),
    })
}

/// Discrete non-ergodic estimator `n X²_{n^{m−1}} / (2 Σ_{k<n^m} X²_{k/n})`.
pub fn theta_hat_4<P: Trajectory + ?Sized>(
    path: &P,
    _hurst: HurstParam,
    n: u64,
    m: u32,
) -> Result<EstimateReport> {
    check_discrete_grid(path, n, m)?;
    let points = path.point_count() - 1;
    let ln_sum = path.ln_sum_squares(points);
    if ln_sum == f64::NEG_INFINITY || ln_sum.is_nan() {
        return Err(Error::Degenerate("ΣX² vanishes or is not finite".into()));
    }
    let value = non_ergodic_value(path.ln_abs(points), ln_sum - (n as f64).ln());
    Ok(EstimateReport {
        estimator_id: EstimatorId::DiscNonErg4,
        value,
        horizon_t: path.horizon(),
        m_exponent: Some(m),
        h_step: path.step(),
    })
}

/// `(X_T² − X_0²)/(2∫X²) − ((1/(HΓ(2H)T))∫X²)^{−1/(2H)}`.
///
/// The test of `θ ≤ 0` rejects when `T` times this value exceeds the limit quantile.
pub fn moers_statistic<P: Trajectory + ?Sized>(path: &P, hurst: HurstParam) -> Result<f64> {
    let ln_e = ln_energy(path)?;
    let last = path.point_count() - 1;
    let ratio = non_ergodic_value(path.ln_abs(last), ln_e) - non_ergodic_value(path.ln_abs(0), ln_e);
    Ok(ratio + ergodic_value(ln_e, path.horizon(), hurst))
}

/// Type-1 empirical quantile of sorted data: element `⌈p·n⌉ − 1`, the minimum at `p = 0`.
pub fn empirical_quantile(sorted: &[f64], prob: Probability) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let n = sorted.len();
    let idx = ((prob.value() * n as f64).ceil() as usize).clamp(1, n) - 1;
    sorted[idx]
}

/// Monte Carlo draws of the limit variable
/// `(B₁^H)²/(2∫₀¹(B^H)²) − ((1/(HΓ(2H)))∫₀¹(B^H)²)^{−1/(2H)}`.
///
/// Paths are generated in independent pairs; pair `j` uses stream `j` of `seed`.
pub fn moers_limit_sample(
    hurst: HurstParam,
    replications: usize,
    grid_points: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if replications == 0 {
        return Err(Error::invalid("replications", "must be at least 1"));
    }
    if grid_points < 2 {
        return Err(Error::invalid("grid_points", "must be at least 2"));
    }
    let generator = FbmGenerator::new(hurst, 1.0 / grid_points as f64, grid_points)?;
    let pairs = replications.div_ceil(2);
    let drawn = (0..pairs)
        .into_par_iter()
        .map(|j| {
            let (a, b) = generator.sample_pair(&mut stream(seed, j as u64));
            Ok([moers_statistic(&a, hurst)?, moers_statistic(&b, hurst)?])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out: Vec<f64> = drawn.into_iter().flatten().collect();
    out.truncate(replications);
    Ok(out)
}

/// Empirical `prob`-quantile of the Moers limit law.
pub fn moers_limit_quantile(
    hurst: HurstParam,
    prob: Probability,
    replications: usize,
    grid_points: usize,
    seed: u64,
) -> Result<f64> {
    if replications < MIN_QUANTILE_REPLICATIONS {
        return Err(Error::invalid(
            "replications",
            format!("must be at least {MIN_QUANTILE_REPLICATIONS}, got {replications}"),
        ));
    }
    let mut sample = moers_limit_sample(hurst, replications, grid_points, seed)?;
    sample.sort_by(f64::total_cmp);
    Ok(empirical_quantile(&sample, prob))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::sample_fbm;
    use crate::fou::{euler_path, euler_path_scaled, ModelParams};

    fn h(v: f64) -> HurstParam {
        HurstParam::new(v).unwrap()
    }

    fn constant(c: f64, step: f64, points: usize) -> SamplePath {
        SamplePath::new(step, vec![c; points]).unwrap()
    }

    #[test]
    fn constant_path_closed_forms() {
        let hp = h(0.7);
        let hg = h_gamma_2h(hp);
        let c = 1.7;
        let path = constant(c, 0.01, 1001);
        let expect1 = -(c * c / hg).powf(-1.0 / 1.4);
        let e1 = theta_hat_1(&path, hp).unwrap();
        assert!((e1.value / expect1 - 1.0).abs() < 1e-12);
        assert_eq!(e1.estimator_id, EstimatorId::Erg1);
        assert!((e1.horizon_t - 10.0).abs() < 1e-12);

        let e2 = theta_hat_2(&path, hp).unwrap();
        assert!((e2.value - 1.0 / 20.0).abs() < 1e-12);

        let grid = constant(c, 0.1, 101);
        let e3 = theta_hat_3(&grid, hp, 10, 2).unwrap();
        assert!((e3.value / expect1 - 1.0).abs() < 1e-12);
        assert_eq!(e3.m_exponent, Some(2));
        let e4 = theta_hat_4(&grid, hp, 10, 2).unwrap();
        assert!((e4.value - 1.0 / 20.0).abs() < 1e-12);

        let moers = moers_statistic(&path, hp).unwrap();
        assert!((moers / expect1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_path_riemann_sum_converges() {
        // Left-endpoint bias is 3/(2n).
        for (n, tol) in [(100usize, 0.03), (10_000, 3e-4)] {
            let values = (0..=n).map(|k| k as f64 / n as f64).collect();
            let path = SamplePath::new(1.0 / n as f64, values).unwrap();
            let v = theta_hat_2(&path, h(0.5)).unwrap().value;
            assert!((v - 1.5).abs() < tol, "n = {n}: {v}");
        }
    }

    #[test]
    fn zero_path_is_degenerate() {
        let z = constant(0.0, 0.1, 11);
        assert!(matches!(theta_hat_1(&z, h(0.5)), Err(Error::Degenerate(_))));
        assert!(matches!(theta_hat_2(&z, h(0.5)), Err(Error::Degenerate(_))));
    }

    #[test]
    fn discrete_grid_is_checked() {
        let p = constant(1.0, 0.1, 100);
        assert!(matches!(theta_hat_3(&p, h(0.5), 10, 2), Err(Error::Shape(_))));
        let p = constant(1.0, 0.2, 101);
        assert!(matches!(theta_hat_4(&p, h(0.5), 10, 2), Err(Error::Shape(_))));
        assert!(theta_hat_3(&constant(1.0, 0.1, 101), h(0.5), 10, 1).is_err());
    }

    #[test]
    fn scaled_and_plain_paths_agree() {
        let hp = h(0.6);
        let b = sample_fbm(hp, 0.01, 2000, &mut stream(4, 0)).unwrap();
        for theta in [-0.8, 0.0, 0.5] {
            let p = ModelParams::new(theta, 1.0, hp).unwrap();
            let plain = euler_path(&p, &b).unwrap();
            let scaled = euler_path_scaled(&p, &b).unwrap();
            let pairs = [
                (theta_hat_1(&plain, hp).unwrap().value, theta_hat_1(&scaled, hp).unwrap().value),
                (theta_hat_2(&plain, hp).unwrap().value, theta_hat_2(&scaled, hp).unwrap().value),
                (moers_statistic(&plain, hp).unwrap(), moers_statistic(&scaled, hp).unwrap()),
            ];
            for (a, b) in pairs {
                assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "θ = {theta}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn theta_hat_4_survives_overflow() {
        // θ = 1 on [0, 1000]: X_T ~ e^{1000} is not representable.
        let hp = h(0.5);
        let n = 1000u64;
        let b = sample_fbm(hp, 1.0 / n as f64, 1_000_000, &mut stream(9, 0)).unwrap();
        let p = ModelParams::new(1.0, 1.0, hp).unwrap();
        let x = euler_path_scaled(&p, &b).unwrap();
        assert!(x.to_sample_path().is_err());
        let v = theta_hat_4(&x, hp, n, 2).unwrap().value;
        // Deterministic Euler growth: n((1 + 1/n)² − 1)/2.
        let r = 1.0 + 1.0 / n as f64;
        assert!((v - n as f64 * (r * r - 1.0) / 2.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn quantile_conventions() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(empirical_quantile(&s, Probability::new(0.0).unwrap()), 1.0);
        assert_eq!(empirical_quantile(&s, Probability::new(0.5).unwrap()), 2.0);
        assert_eq!(empirical_quantile(&s, Probability::new(0.51).unwrap()), 3.0);
        assert_eq!(empirical_quantile(&s, Probability::new(1.0).unwrap()), 4.0);
    }

    #[test]
    fn moers_sample_is_reproducible() {
        let a = moers_limit_sample(h(0.7), 7, 256, 3).unwrap();
        let b = moers_limit_sample(h(0.7), 7, 256, 3).unwrap();
        assert_eq!(a.len(), 7);
        assert_eq!(a, b);
        assert!(matches!(
            moers_limit_quantile(h(0.7), Probability::new(0.95).unwrap(), 999, 256, 3),
            Err(Error::InvalidParameter { .. })
        ));
    }
}
