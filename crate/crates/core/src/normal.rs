//! Standard normal distribution functions.
//!
//! Both tails are evaluated through `erfc` so that probabilities far in
//! either tail keep full relative precision instead of cancelling against 1.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Beyond this magnitude Φ is clamped to 0 or 1; the clamping error is below 1e-300.
pub const SATURATION: f64 = 40.0;

/// Standard normal density φ(x).
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Lower tail Φ(x) = P(N ≤ x).
pub fn cdf(x: f64) -> f64 {
    if x >= SATURATION {
        1.0
    } else if x <= -SATURATION {
        0.0
    } else {
        0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
    }
}

/// Upper tail Q(x) = 1 − Φ(x), accurate for large positive x.
pub fn sf(x: f64) -> f64 {
    cdf(-x)
}

/// P(lo ≤ N ≤ hi) for lo ≤ hi, computed from whichever tails avoid cancellation.
pub fn interval(lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi);
    if lo >= 0.0 {
        sf(lo) - sf(hi)
    } else if hi <= 0.0 {
        cdf(hi) - cdf(lo)
    } else {
        1.0 - sf(hi) - cdf(lo)
    }
}
