//! Simulation and inference for the fractional Ornstein–Uhlenbeck process
//! `dX = θX dt + dB^H`, `X₀ = x₀`.

pub mod cli;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod fbm;
pub mod fou;
pub mod marginals;
pub mod normal;
pub mod quadrature;
pub mod rng;

pub use error::{Error, Result};
pub use estimators::{
    moers_limit_quantile, moers_statistic, theta_hat_1, theta_hat_2, theta_hat_3, theta_hat_4,
    EstimateReport, EstimatorId, Trajectory,
};
pub use fbm::{FbmGenerator, FbmMethod, HurstParam, SamplePath};
pub use fou::{ModelParams, ScaledPath};
pub use marginals::{g_cdf, variance_v, LogMarginalLaw, MarginalLaw, Probability};
pub use sign_test::{
    find_t0, find_t0_tilde, power_alg1, power_alg2, solve_c, test_positive_drift,
    test_theta0_drift, z_statistic, PositiveDriftTest, SearchConfig, TestDecision,
    Theta0DriftTest, ThresholdSolveResult, Verdict,
};
