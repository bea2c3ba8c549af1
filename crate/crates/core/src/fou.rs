//! Fractional Ornstein–Uhlenbeck trajectories `dX = θX dt + dB^H`, `X_0 = x₀`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbm::{HurstParam, SamplePath};
use crate::marginals::MarginalLaw;

/// Paths are aborted once `|X_k|` exceeds this.
pub const DIVERGENCE_BOUND: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub theta: f64,
    pub x0: f64,
    pub hurst: HurstParam,
}

impl ModelParams {
    pub fn new(theta: f64, x0: f64, hurst: HurstParam) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::invalid("theta", format!("must be finite, got {theta}")));
        }
        if !x0.is_finite() {
            return Err(Error::invalid("x0", format!("must be finite, got {x0}")));
        }
        Ok(Self { theta, x0, hurst })
    }
}

fn check_driving(driving: &SamplePath) -> Result<()> {
    if driving.values()[0] != 0.0 {
        return Err(Error::invalid(
            "driving",
            format!("an fBm path must start at 0, got {}", driving.values()[0]),
        ));
    }
    Ok(())
}

fn guard(index: usize, x: f64) -> Result<f64> {
    if x.is_finite() && x.abs() <= DIVERGENCE_BOUND {
        Ok(x)
    } else {
        Err(Error::DivergedPath { index })
    }
}

/// Euler scheme `X_{k+1} = X_k(1 + θh) + (B_{k+1} − B_k)` on the driving grid.
pub fn euler_path(params: &ModelParams, driving: &SamplePath) -> Result<SamplePath> {
    check_driving(driving)?;
    let b = driving.values();
    let growth = 1.0 + params.theta * driving.step();
    let mut out = Vec::with_capacity(b.len());
    let mut x = params.x0;
    out.push(x);
    for k in 1..b.len() {
        x = guard(k, x * growth + (b[k] - b[k - 1]))?;
        out.push(x);
    }
    SamplePath::new(driving.step(), out)
}

/// Solution formula `X_t = x₀e^{θt} + θ∫₀ᵗ e^{θ(t−s)}B_s ds + B_t` on every grid point,
/// with the integral by the composite trapezoidal rule.
pub fn solution_path(params: &ModelParams, driving: &SamplePath) -> Result<SamplePath> {
    check_driving(driving)?;
    let b = driving.values();
    let h = driving.step();
    let decay = (params.theta * h).exp();
    let mut integral = 0.0;
    let mut out = Vec::with_capacity(b.len());
    out.push(params.x0);
    for k in 1..b.len() {
        integral = decay * integral + 0.5 * h * (decay * b[k - 1] + b[k]);
        let t = k as f64 * h;
        let x = params.x0 * (params.theta * t).exp() + params.theta * integral + b[k];
        out.push(guard(k, x)?);
    }
    SamplePath::new(h, out)
}

/// Value of the solution formula at grid index `t_index`.
pub fn solution_value_from_fbm(
    params: &ModelParams,
    driving: &SamplePath,
    t_index: usize,
) -> Result<f64> {
    check_driving(driving)?;
    if t_index >= driving.len() {
        return Err(Error::invalid(
            "t_index",
            format!("{t_index} is outside a path of {} points", driving.len()),
        ));
    }
    let b = driving.values();
    let h = driving.step();
    let t = t_index as f64 * h;
    // ∫₀ᵗ e^{θ(t−s)} B_s ds, trapezoidal.
    let mut integral = 0.0;
    for k in 0..=t_index {
        let w = if k == 0 || k == t_index { 0.5 } else { 1.0 };
        integral += w * (params.theta * (t - k as f64 * h)).exp() * b[k];
    }
    integral *= h;
    let x = params.x0 * (params.theta * t).exp() + params.theta * integral + b[t_index];
    guard(t_index, x)
}

/// Euler path kept as `X_k = mantissa_k · growth^k`.
///
/// For θ > 0 the mantissa converges instead of growing like `e^{θt}`, so paths
/// over horizons where `X_t` itself overflows a 64-bit float remain usable by
/// scale-invariant estimators. For θ ≤ 0 the growth factor is 1 and the
/// mantissa is the plain Euler path.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledPath {
    step: f64,
    mantissa: Vec<f64>,
    ln_growth: f64,
}

impl ScaledPath {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.mantissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mantissa.is_empty()
    }

    pub fn mantissa(&self) -> &[f64] {
        &self.mantissa
    }

    /// `ln` of the per-index growth factor.
    pub fn ln_growth(&self) -> f64 {
        self.ln_growth
    }

    pub fn horizon(&self) -> f64 {
        (self.len() - 1) as f64 * self.step
    }

    /// `ln |X_k|`.
    pub fn ln_abs(&self, k: usize) -> f64 {
        self.mantissa[k].abs().ln() + k as f64 * self.ln_growth
    }

    /// `X_k`, possibly infinite.
    pub fn value(&self, k: usize) -> f64 {
        self.mantissa[k] * (k as f64 * self.ln_growth).exp()
    }

    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::invalid("stride", "must be at least 1"));
        }
        Ok(Self {
            step: self.step * stride as f64,
            mantissa: self.mantissa.iter().step_by(stride).copied().collect(),
            ln_growth: self.ln_growth * stride as f64,
        })
    }

    /// Plain path, failing if any value leaves the representable range.
    pub fn to_sample_path(&self) -> Result<SamplePath> {
        let values = (0..self.len())
            .map(|k| guard(k, self.value(k)))
            .collect::<Result<Vec<_>>>()?;
        SamplePath::new(self.step, values)
    }
}

/// The Euler recursion of [`euler_path`] in the overflow-free representation.
pub fn euler_path_scaled(params: &ModelParams, driving: &SamplePath) -> Result<ScaledPath> {
    check_driving(driving)?;
    let h = driving.step();
    let growth = 1.0 + params.theta * h;
    if growth <= 0.0 {
        return Err(Error::invalid(
            "step",
            format!("1 + θh = {growth} must be positive for the Euler scheme"),
        ));
    }
    let ln_growth = if params.theta > 0.0 { growth.ln() } else { 0.0 };
    let b = driving.values();
    let mut mantissa = Vec::with_capacity(b.len());
    let mut w = params.x0;
    mantissa.push(w);
    if params.theta > 0.0 {
        // W_{k+1} = W_k + ΔB_k · growth^{−(k+1)}
        for k in 1..b.len() {
            w += (b[k] - b[k - 1]) * (-(k as f64) * ln_growth).exp();
            mantissa.push(w);
        }
    } else {
        for k in 1..b.len() {
            w = guard(k, w * growth + (b[k] - b[k - 1]))?;
            mantissa.push(w);
        }
    }
    Ok(ScaledPath {
        step: h,
        mantissa,
        ln_growth,
    })
}

/// Draws `X_t` from its exact Gaussian law; the law is computed once.
#[derive(Debug, Clone, Copy)]
pub struct ExactMarginalSampler {
    law: MarginalLaw,
    sd: f64,
}

impl ExactMarginalSampler {
    pub fn new(params: &ModelParams, t: f64) -> Result<Self> {
        let law = MarginalLaw::new(params.theta, params.x0, t, params.hurst)?;
        Ok(Self {
            law,
            sd: law.variance.sqrt(),
        })
    }

    pub fn law(&self) -> MarginalLaw {
        self.law
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.law.mean + self.sd * z
    }
}

/// One draw of `X_t ~ N(x₀e^{θt}, v(θ,t))`.
pub fn sample_marginal_exact<R: Rng + ?Sized>(
    params: &ModelParams,
    t: f64,
    rng: &mut R,
) -> Result<f64> {
    Ok(ExactMarginalSampler::new(params, t)?.sample(rng))
}
