//! One-dimensional law of the fOU process.
//!
//! `X_t ~ N(x₀e^{θt}, v(θ,t))` with
//! `v(θ,t) = H ∫₀ᵗ s^{2H−1} (e^{θs} + e^{θ(2t−s)}) ds`.
//!
//! The integral is evaluated after the substitution `u = s^{2H}`, which turns
//! `H s^{2H−1} ds` into `du/2` and leaves a bounded integrand. The `u`-range is
//! split into panels: geometrically graded towards `s = 0` (where
//! `s = u^{1/(2H)}` is not smooth) and of bounded width `|θ|Δs` elsewhere so
//! each panel sees at most a moderate exponential variation. Every panel uses
//! the same Gauss–Legendre rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbm::HurstParam;
use crate::normal;
use crate::quadrature::{self, DEFAULT_NODES};

/// Above this `θt` the direct variance overflows; use [`log_variance_v`].
pub const MAX_THETA_T: f64 = 350.0;

/// Largest `|θ| Δs` spanned by one panel.
const PANEL_RATE: f64 = 8.0;
/// Number of geometric panels towards the origin; the innermost ends at `L·8^{-14}`.
const GRADED_PANELS: i32 = 14;
const GRADING_RATIO: f64 = 8.0;
/// Panels whose integrand bound is below this fraction of the running sum are skipped.
const SKIP_FRACTION: f64 = 1e-20;

/// A probability in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::invalid(
                "probability",
                format!("must lie in [0, 1], got {value}"),
            ))
        }
    }

    /// Clamps rounding excursions of at most 1e-12 into [0, 1].
    pub(crate) fn clamped(value: f64) -> Self {
        debug_assert!(
            (-1e-12..=1.0 + 1e-12).contains(&value),
            "probability {value} outside slack"
        );
        Self(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Gauss–Legendre nodes per panel.
    pub nodes: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            nodes: DEFAULT_NODES,
        }
    }
}

#[derive(Clone, Copy)]
enum Integrand {
    Variance,
    Derivative,
}

fn check_args(theta: f64, t: f64) -> Result<()> {
    if !theta.is_finite() {
        return Err(Error::invalid("theta", format!("must be finite, got {theta}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", format!("must be positive and finite, got {t}")));
    }
    Ok(())
}

/// `H ∫₀ᵗ s^{2H−1} f(s) ds` for the selected integrand.
fn integrate(theta: f64, t: f64, hurst: HurstParam, cfg: QuadratureConfig, kind: Integrand) -> f64 {
    let rule = quadrature::rule(cfg.nodes);
    let two_h = hurst.two_h();
    let inv_two_h = 1.0 / two_h;
    let width = if theta == 0.0 {
        t
    } else {
        t.min(PANEL_RATE / theta.abs())
    };

    let eval = |s: f64| -> f64 {
        let near = (theta * s).exp();
        let far = (theta * (2.0 * t - s)).exp();
        match kind {
            Integrand::Variance => near + far,
            Integrand::Derivative => s * near + (2.0 * t - s) * far,
        }
    };
    let panel = |a: f64, b: f64| -> f64 {
        let (ua, ub) = (a.powf(two_h), b.powf(two_h));
        0.5 * rule.integrate(ua, ub, |u| eval(u.powf(inv_two_h)))
    };

    // Graded panels on [0, width], innermost first.
    let mut acc = 0.0;
    let mut lo = 0.0;
    for k in (0..GRADED_PANELS).rev() {
        let hi = width * GRADING_RATIO.powi(-k);
        acc += panel(lo, hi);
        lo = hi;
    }
    // Uniform panels on [width, t].
    let mut a = width;
    while a < t {
        let b = (a + width).min(t);
        if theta < 0.0 {
            // Both exponentials are monotone on the panel, so this bounds the integrand.
            let bound = match kind {
                Integrand::Variance => (theta * a).exp() + (theta * (2.0 * t - b)).exp(),
                Integrand::Derivative => {
                    b * (theta * a).exp() + 2.0 * t * (theta * (2.0 * t - b)).exp()
                }
            };
            let mass = 0.5 * (b.powf(two_h) - a.powf(two_h)) * bound;
            if mass >= SKIP_FRACTION * acc {
                acc += panel(a, b);
            }
        } else {
            acc += panel(a, b);
        }
        a = b;
    }
    acc
}

/// Variance `v(θ, t)` of `X_t`.
pub fn variance_v(theta: f64, t: f64, hurst: HurstParam) -> Result<f64> {
    variance_v_with(theta, t, hurst, QuadratureConfig::default())
}

pub fn variance_v_with(theta: f64, t: f64, hurst: HurstParam, cfg: QuadratureConfig) -> Result<f64> {
    check_args(theta, t)?;
    if theta * t >= MAX_THETA_T {
        return Err(Error::Range(format!(
            "v(θ, t) overflows for θt = {} >= {MAX_THETA_T}; use the log-space variance",
            theta * t
        )));
    }
    let v = integrate(theta, t, hurst, cfg, Integrand::Variance);
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Range(format!("v({theta}, {t}) = {v} is not representable")))
    }
}

/// `ln v(θ, t)`, finite for any `θt`.
///
/// For θ > 0 uses `v(θ,t) = e^{2θt} v(−θ,t)`, so only decaying exponentials are integrated.
pub fn log_variance_v(theta: f64, t: f64, hurst: HurstParam) -> Result<f64> {
    log_variance_v_with(theta, t, hurst, QuadratureConfig::default())
}

pub fn log_variance_v_with(
    theta: f64,
    t: f64,
    hurst: HurstParam,
    cfg: QuadratureConfig,
) -> Result<f64> {
    check_args(theta, t)?;
    let lv = if theta > 0.0 {
        2.0 * theta * t + integrate(-theta, t, hurst, cfg, Integrand::Variance).ln()
    } else {
        integrate(theta, t, hurst, cfg, Integrand::Variance).ln()
    };
    if lv.is_finite() {
        Ok(lv)
    } else {
        Err(Error::Range(format!("ln v({theta}, {t}) = {lv}")))
    }
}

/// `∂v/∂θ`, which is strictly positive.
pub fn variance_v_dtheta(theta: f64, t: f64, hurst: HurstParam) -> Result<f64> {
    variance_v_dtheta_with(theta, t, hurst, QuadratureConfig::default())
}

pub fn variance_v_dtheta_with(
    theta: f64,
    t: f64,
    hurst: HurstParam,
    cfg: QuadratureConfig,
) -> Result<f64> {
    check_args(theta, t)?;
    if theta * t >= MAX_THETA_T {
        return Err(Error::Range(format!(
            "∂v/∂θ overflows for θt = {} >= {MAX_THETA_T}",
            theta * t
        )));
    }
    let d = integrate(theta, t, hurst, cfg, Integrand::Derivative);
    if d.is_finite() {
        Ok(d)
    } else {
        Err(Error::Range(format!("∂v/∂θ({theta}, {t}) = {d}")))
    }
}

/// Limit `HΓ(2H)/|θ|^{2H}` of `v(θ,t)` (θ < 0) or of `e^{−2θt}v(θ,t)` (θ > 0).
pub fn asymptotic_variance(theta: f64, hurst: HurstParam) -> Result<f64> {
    if theta == 0.0 || !theta.is_finite() {
        return Err(Error::Domain(format!(
            "asymptotic variance needs a finite nonzero θ, got {theta}"
        )));
    }
    Ok(h_gamma_2h(hurst) / theta.abs().powf(hurst.two_h()))
}

/// `HΓ(2H)`.
pub fn h_gamma_2h(hurst: HurstParam) -> f64 {
    hurst.value() * libm::tgamma(hurst.two_h())
}

/// Mean and variance of `X_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalLaw {
    pub mean: f64,
    pub variance: f64,
}

impl MarginalLaw {
    pub fn new(theta: f64, x0: f64, t: f64, hurst: HurstParam) -> Result<Self> {
        let variance = variance_v(theta, t, hurst)?;
        let mean = x0 * (theta * t).exp();
        if !mean.is_finite() {
            return Err(Error::Range(format!("mean x0·e^(θt) overflows at θt = {}", theta * t)));
        }
        Ok(Self { mean, variance })
    }
}

/// The same law kept in log form: `ln|E X_t|` and `ln sd(X_t)`.
///
/// Evaluating `P(|X_t| ≤ e^{b})` from these never forms `e^{θt}` or `e^{t^c}`
/// explicitly, so it stays finite for `θt` in the thousands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMarginalLaw {
    /// `ln(|x₀|) + θt`; `-inf` when `x₀ = 0`.
    pub ln_abs_mean: f64,
    pub ln_sd: f64,
}

impl LogMarginalLaw {
    pub fn new(theta: f64, x0: f64, t: f64, hurst: HurstParam) -> Result<Self> {
        if !x0.is_finite() {
            return Err(Error::invalid("x0", format!("must be finite, got {x0}")));
        }
        let ln_var = log_variance_v(theta, t, hurst)?;
        Ok(Self {
            ln_abs_mean: x0.abs().ln() + theta * t,
            ln_sd: 0.5 * ln_var,
        })
    }

    /// Standardized endpoints `((−A − m)/sd, (A − m)/sd)` for `A = e^{ln_bound}`,
    /// taking `m = |E X_t|` (the law of `|X_t|` is symmetric in the sign of the mean).
    fn standardized_interval(&self, ln_bound: f64) -> (f64, f64) {
        let (ln_a, ln_m) = (ln_bound, self.ln_abs_mean);
        let standardize = |ln_mag: f64| (ln_mag - self.ln_sd).exp();
        if ln_m == f64::NEG_INFINITY {
            let z = standardize(ln_a);
            return (-z, z);
        }
        let d = ln_a - ln_m;
        // A − m formed without cancellation.
        let upper = if d > 0.0 {
            standardize(ln_a + (-(-d).exp_m1()).ln())
        } else if d < 0.0 {
            -standardize(ln_m + (-d.exp_m1()).ln())
        } else {
            0.0
        };
        let ln_sum = ln_a.max(ln_m) + (-d.abs()).exp().ln_1p();
        (-standardize(ln_sum), upper)
    }

    /// `P(|X_t| ≤ e^{ln_bound})`.
    pub fn abs_within(&self, ln_bound: f64) -> f64 {
        let (lower, upper) = self.standardized_interval(ln_bound);
        Probability::clamped(normal::interval(lower, upper)).value()
    }

    /// `P(|X_t| > e^{ln_bound})`, accurate when it is tiny.
    pub fn abs_exceeds(&self, ln_bound: f64) -> f64 {
        let (lower, upper) = self.standardized_interval(ln_bound);
        Probability::clamped(normal::cdf(lower) + normal::sf(upper)).value()
    }

    /// `P(Z(t) ≤ c) = P(|X_t| ≤ e^{t^c})`.
    pub fn statistic_cdf(&self, t: f64, c: f64) -> f64 {
        self.abs_within(t.powf(c))
    }

    /// `P(Z(t) > c)`.
    pub fn statistic_sf(&self, t: f64, c: f64) -> f64 {
        self.abs_exceeds(t.powf(c))
    }
}

/// `g(θ, x₀, t, c) = P(Z(t) ≤ c)` for `t > 1`.
pub fn g_cdf(theta: f64, x0: f64, t: f64, c: f64, hurst: HurstParam) -> Result<Probability> {
    if !(t > 1.0) {
        return Err(Error::Domain(format!("g(θ, x0, t, c) requires t > 1, got t = {t}")));
    }
    if c.is_nan() {
        return Err(Error::invalid("c", "must not be NaN"));
    }
    let law = LogMarginalLaw::new(theta, x0, t, hurst)?;
    Ok(Probability::clamped(law.statistic_cdf(t, c)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(v: f64) -> HurstParam {
        HurstParam::new(v).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn zero_drift_variance_is_t_to_2h() {
        let v = variance_v(0.0, 5.0, h(0.3)).unwrap();
        assert!(rel(v, 5f64.powf(0.6)) < 1e-10);
    }

    #[test]
    fn reflection_identity() {
        let lhs = variance_v(2.0, 3.0, h(0.6)).unwrap();
        let rhs = 12f64.exp() * variance_v(-2.0, 3.0, h(0.6)).unwrap();
        assert!(rel(lhs, rhs) < 1e-8);
    }

    #[test]
    fn ergodic_limit() {
        let v = variance_v(-1.0, 200.0, h(0.5)).unwrap();
        assert!((v - 0.5).abs() < 1e-6);
    }

    #[test]
    fn brownian_closed_form() {
        // H = ½: v = (e^{2θt} − 1)/(2θ).
        for &(theta, t) in &[(-0.7, 3.0), (0.4, 6.0), (1.3, 0.2)] {
            let v = variance_v(theta, t, h(0.5)).unwrap();
            let exact = ((2.0 * theta * t).exp() - 1.0) / (2.0 * theta);
            assert!(rel(v, exact) < 1e-12, "θ={theta} t={t}");
        }
    }

    #[test]
    fn log_variance_examples() {
        let direct = variance_v(1.0, 10.0, h(0.5)).unwrap().ln();
        assert!((log_variance_v(1.0, 10.0, h(0.5)).unwrap() - direct).abs() < 1e-10);
        // ln v(1, 500, ½) = ln((e^{1000} − 1)/2) = 1000 − ln 2.
        let lv = log_variance_v(1.0, 500.0, h(0.5)).unwrap();
        assert!((lv - (1000.0 - 2f64.ln())).abs() < 1e-10);
        // mpmath quadrature: v(0.5, 2, 0.3) = 5.1720153420708836846
        let lv = log_variance_v(0.5, 2.0, h(0.3)).unwrap();
        assert!((lv - 5.172_015_342_070_884f64.ln()).abs() < 1e-12);
        assert!(variance_v(1.0, 500.0, h(0.5)).is_err());
    }

    #[test]
    fn derivative_examples() {
        assert!((variance_v_dtheta(0.0, 1.0, h(0.5)).unwrap() - 1.0).abs() < 1e-13);
        let hv = h(0.7);
        let d = variance_v_dtheta(0.3, 2.0, hv).unwrap();
        let eps = 1e-5;
        let fd = (variance_v(0.3 + eps, 2.0, hv).unwrap() - variance_v(0.3 - eps, 2.0, hv).unwrap())
            / (2.0 * eps);
        assert!(rel(d, fd) < 1e-5);
    }

    #[test]
    fn asymptotic_variance_examples() {
        assert!((asymptotic_variance(-1.0, h(0.5)).unwrap() - 0.5).abs() < 1e-15);
        assert!((asymptotic_variance(-2.0, h(0.5)).unwrap() - 0.25).abs() < 1e-15);
        // 0.7·Γ(1.4), mpmath.
        assert!(rel(asymptotic_variance(1.0, h(0.7)).unwrap(), 0.621_084_672_252_152_7) < 1e-14);
        assert!(matches!(asymptotic_variance(0.0, h(0.5)), Err(Error::Domain(_))));
    }

    #[test]
    fn g_saturation_and_symmetric_case() {
        let g = g_cdf(0.0, 1.0, 10.0, 0.99, h(0.5)).unwrap().value();
        assert!((g - 1.0).abs() < 1e-15);

        // x0 = 0, t = e, choose c with e^{t^c} = t^H · 1.959964 ⇒ g = 2Φ(1.959964) − 1.
        let t = std::f64::consts::E;
        let hv = h(0.4);
        let bound: f64 = t.powf(0.4) * 1.959_963_984_540_054;
        let c = bound.ln().ln() / t.ln();
        let g = g_cdf(0.0, 0.0, t, c, hv).unwrap().value();
        assert!((g - 0.95).abs() < 1e-12);
    }

    #[test]
    fn g_matches_naive_formula_in_moderate_range() {
        let hv = h(0.3);
        for &(theta, x0, t, c) in &[(0.1, 1.0, 20.0, 0.4), (-0.2, 2.0, 5.0, 0.6), (0.05, -1.0, 30.0, 0.2)] {
            let v: f64 = variance_v(theta, t, hv).unwrap();
            let a = t.powf(c).exp();
            let m = x0 * (theta * t).exp();
            let naive = normal::cdf((a - m) / v.sqrt()) + normal::cdf((a + m) / v.sqrt()) - 1.0;
            let g = g_cdf(theta, x0, t, c, hv).unwrap().value();
            assert!((g - naive).abs() < 1e-13, "{theta} {x0} {t} {c}: {g} vs {naive}");
        }
    }

    #[test]
    fn g_is_finite_for_huge_theta_t() {
        let g = g_cdf(0.1, 1.0, 1e5, 0.5, h(0.5)).unwrap().value();
        assert!((0.0..=1.0).contains(&g));
        // Mean e^{1e4} dwarfs e^{√1e5}: |X| ≤ bound is essentially impossible.
        assert!(g < 1e-10);
        assert!(g_cdf(0.1, 1.0, 1e5, 1.0, h(0.5)).unwrap().value() > 1.0 - 1e-12);
    }

    #[test]
    fn g_rejects_t_at_most_one() {
        assert!(matches!(g_cdf(0.0, 1.0, 1.0, 0.5, h(0.5)), Err(Error::Domain(_))));
        assert!(g_cdf(0.0, 1.0, 0.5, 0.5, h(0.5)).is_err());
    }

    #[test]
    fn node_doubling_is_stable() {
        let coarse = QuadratureConfig { nodes: 128 };
        let fine = QuadratureConfig { nodes: 256 };
        for hv in [0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.97] {
            for &(theta, t) in &[(-3.0, 50.0), (-0.1, 1.0), (0.0, 7.0), (0.5, 20.0), (2.0, 100.0)] {
                let a = variance_v_with(theta, t, h(hv), coarse).unwrap();
                let b = variance_v_with(theta, t, h(hv), fine).unwrap();
                assert!(rel(a, b) < 1e-10, "H={hv} θ={theta} t={t}: {a} {b}");
            }
        }
    }
}
