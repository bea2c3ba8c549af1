//! Fractional Brownian motion: covariance, fractional Gaussian noise and
//! exact sampling on a uniform grid.
//!
//! Paths are generated by circulant embedding of the unit-step fGn
//! autocovariance (Davies–Harte / Wood–Chan), falling back to the Hosking
//! (Durbin–Levinson) recursion if the embedding ever has a negative
//! eigenvalue. Both methods are exact in law; increments at step `h` are the
//! unit-grid noise scaled by `h^H`.

use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of increments a single path may have.
pub const MAX_INCREMENTS: usize = 1 << 27;

/// Relative tolerance on negative circulant eigenvalues before falling back.
pub const EMBEDDING_TOLERANCE: f64 = 1e-10;

const PATH_MAGIC: &[u8; 8] = b"FOUPATH1";

/// Hurst index, strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HurstParam(f64);

impl HurstParam {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::invalid(
                "hurst",
                format!("must lie in the open interval (0, 1), got {value}"),
            ))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// 2H, the exponent that appears in every covariance formula.
    pub fn two_h(self) -> f64 {
        2.0 * self.0
    }
}

impl TryFrom<f64> for HurstParam {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<HurstParam> for f64 {
    fn from(h: HurstParam) -> f64 {
        h.0
    }
}

impl fmt::Display for HurstParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Trajectory sampled on the grid `origin_time + k * step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    step: f64,
    values: Vec<f64>,
    origin_time: f64,
}

impl SamplePath {
    pub fn new(step: f64, values: Vec<f64>) -> Result<Self> {
        Self::with_origin(step, values, 0.0)
    }

    pub fn with_origin(step: f64, values: Vec<f64>, origin_time: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::invalid("step", format!("must be positive and finite, got {step}")));
        }
        if values.is_empty() {
            return Err(Error::invalid("values", "a path needs at least one point"));
        }
        if !(origin_time >= 0.0 && origin_time.is_finite()) {
            return Err(Error::invalid("origin_time", format!("must be >= 0, got {origin_time}")));
        }
        Ok(Self {
            step,
            values,
            origin_time,
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn origin_time(&self) -> f64 {
        self.origin_time
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, index: usize) -> f64 {
        self.origin_time + index as f64 * self.step
    }

    /// Length of the covered time interval.
    pub fn horizon(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Every `stride`-th point, keeping the first one.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::invalid("stride", "must be at least 1"));
        }
        let values = self.values.iter().step_by(stride).copied().collect();
        Self::with_origin(self.step * stride as f64, values, self.origin_time)
    }

    /// Writes the `FOUPATH1` binary dump: magic, step, then the values, all little-endian.
    pub fn write_binary(&self, mut out: impl Write) -> Result<()> {
        out.write_all(PATH_MAGIC)?;
        out.write_all(&self.step.to_le_bytes())?;
        for v in &self.values {
            out.write_all(&v.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_binary(mut input: impl Read) -> Result<Self> {
        let mut header = [0u8; 16];
        input.read_exact(&mut header)?;
        if &header[..8] != PATH_MAGIC {
            return Err(Error::Config("not a FOUPATH1 file (bad magic)".into()));
        }
        let step = f64::from_le_bytes(header[8..].try_into().expect("8 bytes"));
        let mut body = Vec::new();
        input.read_to_end(&mut body)?;
        if body.len() % 8 != 0 {
            return Err(Error::Config(format!(
                "FOUPATH1 body length {} is not a multiple of 8",
                body.len()
            )));
        }
        let values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Self::new(step, values)
    }
}

/// Cov(B_t, B_s) = ½(|t|^{2H} + |s|^{2H} − |t−s|^{2H}).
pub fn fbm_covariance(hurst: HurstParam, t: f64, s: f64) -> f64 {
    let a = hurst.two_h();
    0.5 * (t.abs().powf(a) + s.abs().powf(a) - (t - s).abs().powf(a))
}

/// Autocovariance of unit-step fractional Gaussian noise at `lag`.
pub fn fgn_autocovariance(hurst: HurstParam, lag: usize) -> f64 {
    let a = hurst.two_h();
    let k = lag as f64;
    0.5 * ((k + 1.0).powf(a) - 2.0 * k.powf(a) + (k - 1.0).abs().powf(a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbmMethod {
    CirculantEmbedding,
    Hosking,
}

enum Engine {
    Circulant {
        /// Per-frequency standard deviations of the complex Gaussian weights.
        scales: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    Hosking {
        autocov: Vec<f64>,
    },
}

/// Reusable sampler for fBm paths with fixed Hurst index, step and length.
///
/// Spectral data are computed once, so one generator can serve every
/// replication of a Monte Carlo cell; `sample` only needs `&self`.
pub struct FbmGenerator {
    hurst: HurstParam,
    step: f64,
    increments: usize,
    engine: Engine,
}

impl fmt::Debug for FbmGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FbmGenerator")
            .field("hurst", &self.hurst)
            .field("step", &self.step)
            .field("increments", &self.increments)
            .field("method", &self.method())
            .finish()
    }
}

impl FbmGenerator {
    /// Circulant embedding, or Hosking if the embedding is not nonnegative.
    pub fn new(hurst: HurstParam, step: f64, increments: usize) -> Result<Self> {
        match Self::with_method(hurst, step, increments, FbmMethod::CirculantEmbedding) {
            Err(Error::Embedding { .. }) => {
                Self::with_method(hurst, step, increments, FbmMethod::Hosking)
            }
            other => other,
        }
    }

    pub fn with_method(
        hurst: HurstParam,
        step: f64,
        increments: usize,
        method: FbmMethod,
    ) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::invalid("step", format!("must be positive and finite, got {step}")));
        }
        if increments == 0 {
            return Err(Error::invalid("n_points", "need at least one increment"));
        }
        if increments > MAX_INCREMENTS {
            return Err(Error::Config(format!(
                "{increments} increments exceeds the maximum of {MAX_INCREMENTS}"
            )));
        }
        let engine = match method {
            FbmMethod::CirculantEmbedding => circulant_engine(hurst, increments)?,
            FbmMethod::Hosking => Engine::Hosking {
                autocov: (0..increments).map(|k| fgn_autocovariance(hurst, k)).collect(),
            },
        };
        Ok(Self {
            hurst,
            step,
            increments,
            engine,
        })
    }

    pub fn method(&self) -> FbmMethod {
        match self.engine {
            Engine::Circulant { .. } => FbmMethod::CirculantEmbedding,
            Engine::Hosking { .. } => FbmMethod::Hosking,
        }
    }

    pub fn hurst(&self) -> HurstParam {
        self.hurst
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn increments(&self) -> usize {
        self.increments
    }

    /// Fractional Gaussian noise at the generator's step (variance `step^{2H}`).
    pub fn sample_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let scale = self.step.powf(self.hurst.value());
        let mut noise = match &self.engine {
            Engine::Circulant { scales, fft } => {
                let m = scales.len() - 1;
                let size = 2 * m;
                let mut buf = vec![Complex::new(0.0, 0.0); size];
                buf[0] = Complex::new(scales[0] * normal(rng), 0.0);
                buf[m] = Complex::new(scales[m] * normal(rng), 0.0);
                for k in 1..m {
                    let a = scales[k] * normal(rng);
                    let b = scales[k] * normal(rng);
                    buf[k] = Complex::new(a, b);
                    buf[size - k] = Complex::new(a, -b);
                }
                fft.process(&mut buf);
                buf.truncate(self.increments);
                buf.into_iter().map(|c| c.re).collect::<Vec<_>>()
            }
            Engine::Hosking { autocov } => hosking(autocov, rng),
        };
        for x in &mut noise {
            *x *= scale;
        }
        noise
    }

    /// Two independent fGn draws from one transform (real and imaginary parts).
    ///
    /// Only available for the circulant engine; Hosking draws twice.
    pub fn sample_noise_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let Engine::Circulant { scales, fft } = &self.engine else {
            let a = self.sample_noise(rng);
            let b = self.sample_noise(rng);
            return (a, b);
        };
        let scale = self.step.powf(self.hurst.value());
        let m = scales.len() - 1;
        let size = 2 * m;
        // Each frequency carries independent real and imaginary parts, each
        // with variance λ_k / M.
        let mut buf = Vec::with_capacity(size);
        for k in 0..size {
            let kk = if k <= m { k } else { size - k };
            let s = if kk == 0 || kk == m {
                scales[kk]
            } else {
                scales[kk] * std::f64::consts::SQRT_2
            };
            buf.push(Complex::new(s * normal(rng), s * normal(rng)));
        }
        fft.process(&mut buf);
        let first = buf[..self.increments].iter().map(|c| c.re * scale).collect();
        let second = buf[..self.increments].iter().map(|c| c.im * scale).collect();
        (first, second)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SamplePath {
        path_from_noise(self.step, &self.sample_noise(rng))
    }

    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (SamplePath, SamplePath) {
        let (a, b) = self.sample_noise_pair(rng);
        (path_from_noise(self.step, &a), path_from_noise(self.step, &b))
    }
}

/// Cumulative sum starting at 0.
pub fn path_from_noise(step: f64, noise: &[f64]) -> SamplePath {
    let mut values = Vec::with_capacity(noise.len() + 1);
    let mut acc = 0.0;
    values.push(0.0);
    for &dx in noise {
        acc += dx;
        values.push(acc);
    }
    SamplePath {
        step,
        values,
        origin_time: 0.0,
    }
}

/// fBm path with `n_points` increments (so `n_points + 1` values, the first 0).
pub fn sample_fbm<R: Rng + ?Sized>(
    hurst: HurstParam,
    step: f64,
    n_points: usize,
    rng: &mut R,
) -> Result<SamplePath> {
    Ok(FbmGenerator::new(hurst, step, n_points)?.sample(rng))
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn circulant_engine(hurst: HurstParam, n: usize) -> Result<Engine> {
    let m = n.next_power_of_two();
    let size = 2 * m;
    let mut row: Vec<Complex<f64>> = Vec::with_capacity(size);
    for j in 0..=m {
        row.push(Complex::new(fgn_autocovariance(hurst, j), 0.0));
    }
    for j in (1..m).rev() {
        row.push(Complex::new(fgn_autocovariance(hurst, j), 0.0));
    }
    let fft = FftPlanner::new().plan_fft_forward(size);
    fft.process(&mut row);

    let largest = row.iter().map(|c| c.re).fold(0.0_f64, f64::max);
    let mut scales = Vec::with_capacity(m + 1);
    for (k, c) in row.iter().take(m + 1).enumerate() {
        let lambda = c.re;
        if lambda < -EMBEDDING_TOLERANCE * largest.max(1.0) {
            return Err(Error::Embedding { index: k, value: lambda });
        }
        let lambda = lambda.max(0.0);
        let denom = if k == 0 || k == m { size as f64 } else { 2.0 * size as f64 };
        scales.push((lambda / denom).sqrt());
    }
    Ok(Engine::Circulant { scales, fft })
}

/// Durbin–Levinson recursion, O(n²) per draw.
fn hosking<R: Rng + ?Sized>(autocov: &[f64], rng: &mut R) -> Vec<f64> {
    let n = autocov.len();
    let mut out = Vec::with_capacity(n);
    let mut phi = vec![0.0; n];
    let mut prev = vec![0.0; n];
    let mut var = autocov[0];
    out.push(var.sqrt() * normal(rng));
    for k in 1..n {
        let mut num = autocov[k];
        for j in 1..k {
            num -= prev[j] * autocov[k - j];
        }
        let reflection = num / var;
        phi[k] = reflection;
        for j in 1..k {
            phi[j] = prev[j] - reflection * prev[k - j];
        }
        var *= 1.0 - reflection * reflection;
        let mean: f64 = (1..=k).map(|j| phi[j] * out[k - j]).sum();
        out.push(mean + var.max(0.0).sqrt() * normal(rng));
        prev[1..=k].copy_from_slice(&phi[1..=k]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn h(v: f64) -> HurstParam {
        HurstParam::new(v).unwrap()
    }

    #[test]
    fn hurst_rejects_closed_endpoints() {
        assert!(HurstParam::new(0.0).is_err());
        assert!(HurstParam::new(1.0).is_err());
        assert!(HurstParam::new(f64::NAN).is_err());
        assert!(HurstParam::new(0.5).is_ok());
        assert!(serde_json::from_str::<HurstParam>("1.5").is_err());
    }

    #[test]
    fn covariance_examples() {
        assert!((fbm_covariance(h(0.7), 2.0, 2.0) - 2f64.powf(1.4)).abs() < 1e-14);
        assert!((fbm_covariance(h(0.5), 1.0, 3.0) - 1.0).abs() < 1e-15);
        // Extended-precision oracle: ½(1 + 2^1.4 − 1).
        assert!((fbm_covariance(h(0.7), 1.0, 2.0) - 1.3195079107728942).abs() < 1e-15);
        assert_eq!(fbm_covariance(h(0.3), 1.7, 0.4), fbm_covariance(h(0.3), 0.4, 1.7));
    }

    #[test]
    fn fgn_examples() {
        for v in [0.1, 0.5, 0.9] {
            assert!((fgn_autocovariance(h(v), 0) - 1.0).abs() < 1e-15);
        }
        assert!(fgn_autocovariance(h(0.5), 1).abs() < 1e-15);
        assert!((fgn_autocovariance(h(0.7), 1) - 0.3195079107728942).abs() < 1e-15);
    }

    #[test]
    fn fgn_sign_depends_on_side_of_one_half() {
        for i in 1..20 {
            let hv = i as f64 / 20.0;
            for k in 1..=64 {
                let c = fgn_autocovariance(h(hv), k);
                if hv > 0.5 {
                    assert!(c > 0.0, "H={hv} k={k}");
                } else if hv < 0.5 {
                    assert!(c < 0.0, "H={hv} k={k}");
                }
            }
        }
    }

    #[test]
    fn circulant_embedding_is_nonnegative_across_h() {
        for i in 1..20 {
            let g = FbmGenerator::new(h(i as f64 / 20.0), 1.0, 1000).unwrap();
            assert_eq!(g.method(), FbmMethod::CirculantEmbedding);
        }
    }

    #[test]
    fn determinism() {
        let a = sample_fbm(h(0.3), 0.01, 100, &mut stream(5, 0)).unwrap();
        let b = sample_fbm(h(0.3), 0.01, 100, &mut stream(5, 0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 101);
        assert_eq!(a.values()[0], 0.0);
    }

    #[test]
    fn single_increment_has_variance_step_to_2h() {
        let hurst = h(0.8);
        let step = 0.25;
        let g = FbmGenerator::new(hurst, step, 1).unwrap();
        let n = 40_000;
        let mut s2 = 0.0;
        let mut rng = stream(11, 0);
        for _ in 0..n {
            let p = g.sample(&mut rng);
            assert_eq!(p.len(), 2);
            s2 += p.values()[1].powi(2);
        }
        let var = s2 / n as f64;
        let expected = step.powf(1.6);
        // SE of the variance estimate is ≈ expected·√(2/n).
        assert!((var - expected).abs() < 4.0 * expected * (2.0 / n as f64).sqrt());
    }

    #[test]
    fn hosking_and_circulant_agree_in_second_moments() {
        let hurst = h(0.75);
        let n = 16;
        let reps = 20_000;
        for method in [FbmMethod::CirculantEmbedding, FbmMethod::Hosking] {
            let g = FbmGenerator::with_method(hurst, 1.0, n, method).unwrap();
            let mut rng = stream(3, method as u64);
            let (mut lag1, mut var) = (0.0, 0.0);
            for _ in 0..reps {
                let x = g.sample_noise(&mut rng);
                lag1 += x[3] * x[4];
                var += x[7] * x[7];
            }
            let lag1 = lag1 / reps as f64;
            let var = var / reps as f64;
            let se = (2.0 / reps as f64).sqrt() * 1.2;
            assert!((var - 1.0).abs() < 4.0 * se, "{method:?} var {var}");
            assert!((lag1 - fgn_autocovariance(hurst, 1)).abs() < 4.0 * se, "{method:?} lag1 {lag1}");
        }
    }

    #[test]
    fn binary_round_trip_and_header() {
        let p = SamplePath::new(0.125, vec![0.0, 1.5, -2.25]).unwrap();
        let mut buf = Vec::new();
        p.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..8], b"FOUPATH1");
        assert_eq!(f64::from_le_bytes(buf[8..16].try_into().unwrap()), 0.125);
        assert_eq!(buf.len(), 16 + 3 * 8);
        assert_eq!(SamplePath::read_binary(&buf[..]).unwrap(), p);
        assert!(SamplePath::read_binary(&b"FOUPATH2\0\0\0\0\0\0\0\0"[..]).is_err());
    }

    #[test]
    fn subsample_keeps_endpoints() {
        let p = SamplePath::new(0.5, (0..9).map(f64::from).collect()).unwrap();
        let q = p.subsample(4).unwrap();
        assert_eq!(q.values(), &[0.0, 4.0, 8.0]);
        assert_eq!(q.step(), 2.0);
        assert_eq!(q.horizon(), p.horizon());
    }

    #[test]
    fn size_limits() {
        assert!(matches!(
            FbmGenerator::new(h(0.5), 1.0, MAX_INCREMENTS + 1),
            Err(Error::Config(_))
        ));
        assert!(FbmGenerator::new(h(0.5), 1.0, 0).is_err());
        assert!(FbmGenerator::new(h(0.5), -1.0, 4).is_err());
    }
}
