//! Declarative Monte Carlo experiments producing labelled tables.
//!
//! An [`ExperimentSpec`] describes one table: what is computed in each cell,
//! over which grids, and with how many seeded replications. Replication `r`
//! of cell `i` (row-major) draws from `replication_stream(seed, i, r)`, or
//! for path-based modes pair `r / 2` of that cell, so results do not depend
//! on the number of worker threads.

mod presets;
mod reference_tables;
mod report;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimators::{moers_limit_quantile, moers_statistic, theta_hat_3, theta_hat_4};
use crate::fbm::{FbmGenerator, HurstParam, SamplePath};
use crate::fou::{euler_path_scaled, ExactMarginalSampler, ModelParams};
use crate::marginals::Probability;
use crate::rng::{replication_stream, Stream};
use crate::sign_test::{
    find_t0, find_t0_tilde, z_from_ln_abs, PositiveDriftTest, SearchConfig, Theta0DriftTest,
};

pub use presets::{preset, preset_names, DEFAULT_SEED};
pub use reference_tables::reference_table;
pub use report::{emit_csv, format_g, CellFlag, TableReport, ToleranceRule, Violation};

/// Replications and grid used to estimate the Moers quantile when a spec does not fix it.
pub const MOERS_QUANTILE_REPLICATIONS: usize = 20_000;
pub const MOERS_QUANTILE_GRID: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    ThresholdT0,
    ThresholdT0Tilde,
    RejectionAlg1,
    RejectionAlg2,
    RejectionMoers,
    EstimatorQuality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MarginalMode {
    /// Draw `X_t` from its exact Gaussian law.
    ExactGaussian,
    /// Euler scheme on a simulated fBm path with the experiment's step.
    EulerPath,
}

/// One table.
///
/// Layouts by kind:
///
/// * `ThresholdT0` / `ThresholdT0Tilde`: one row (`alpha=…` / `theta0=…`), columns over `hurst_grid`.
/// * `Rejection*`: rows `H=…,t=…` over `hurst_grid × time_grid`, columns over `theta_grid`.
/// * `EstimatorQuality`: rows `H=…,theta=…,mean` and `…,sd` over `hurst_grid × theta_grid`,
///   columns `n=…` over `time_grid`, which holds the grid densities `n` (horizon `n^{m−1}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub hurst_grid: Vec<HurstParam>,
    #[serde(default)]
    pub theta_grid: Vec<f64>,
    #[serde(default)]
    pub time_grid: Vec<f64>,
    pub alpha: Probability,
    pub x0: f64,
    pub replications: usize,
    pub step: f64,
    pub seed: u64,
    pub marginal_mode: MarginalMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_exponent: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<f64>,
    /// Upper end of the guard-horizon scan (default 1e5).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_max_t: Option<f64>,
    /// Critical value ψ for the Moers test; estimated by simulation when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moers_quantile: Option<f64>,
}

fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        use ExperimentKind::*;
        if self.replications < 1 {
            return Err(config("replications must be at least 1"));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(config(format!("step must be positive, got {}", self.step)));
        }
        if !self.x0.is_finite() {
            return Err(config("x0 must be finite"));
        }
        if self.hurst_grid.is_empty() {
            return Err(config("hurst_grid must not be empty"));
        }
        let needs_theta0 = matches!(self.kind, ThresholdT0Tilde | RejectionAlg2);
        match (needs_theta0, self.theta0) {
            (true, None) => return Err(config(format!("{:?} requires theta0", self.kind))),
            (false, Some(_)) => {
                return Err(config(format!("theta0 is only valid for ThresholdT0Tilde and RejectionAlg2, not {:?}", self.kind)))
            }
            (true, Some(t0)) if !(0.0..1.0).contains(&t0) => {
                return Err(config(format!("theta0 must lie in [0, 1), got {t0}")))
            }
            _ => {}
        }
        let a = self.alpha.value();
        if !(a > 0.0 && a < 1.0) {
            return Err(config(format!("alpha must lie in (0, 1), got {a}")));
        }
        if let Some(max_t) = self.search_max_t {
            if !(max_t > 1.0 && max_t.is_finite()) {
                return Err(config(format!("search_max_t must exceed 1, got {max_t}")));
            }
        }
        if matches!(self.kind, RejectionAlg1 | RejectionAlg2 | RejectionMoers | EstimatorQuality) {
            if self.theta_grid.is_empty() || self.time_grid.is_empty() {
                return Err(config("theta_grid and time_grid must not be empty"));
            }
            if self.theta_grid.iter().any(|x| !x.is_finite()) {
                return Err(config("theta_grid values must be finite"));
            }
        }
        if matches!(self.kind, RejectionAlg1 | RejectionAlg2 | RejectionMoers)
            && self.time_grid.iter().any(|&t| !(t > 1.0 && t.is_finite()))
        {
            return Err(config("time_grid values must exceed 1"));
        }
        if matches!(self.kind, RejectionMoers | EstimatorQuality) && self.marginal_mode != MarginalMode::EulerPath {
            return Err(config(format!("{:?} needs marginal_mode EulerPath", self.kind)));
        }
        if self.kind == EstimatorQuality {
            let m = self.m_exponent.ok_or_else(|| config("EstimatorQuality requires m_exponent"))?;
            if m < 2 {
                return Err(config(format!("m_exponent must exceed 1, got {m}")));
            }
            for &n in &self.time_grid {
                if !(n >= 1.0 && n.fract() == 0.0) {
                    return Err(config(format!("EstimatorQuality time_grid holds integer n, got {n}")));
                }
                stride_for(n as u64, self.step)?;
            }
            if self.theta_grid.contains(&0.0) {
                return Err(config("EstimatorQuality needs θ ≠ 0 to pick an estimator"));
            }
        } else if self.m_exponent.is_some() {
            return Err(config("m_exponent is only valid for EstimatorQuality"));
        }
        if self.kind == RejectionMoers {
            if let Some(q) = self.moers_quantile {
                if !q.is_finite() {
                    return Err(config("moers_quantile must be finite"));
                }
            }
        } else if self.moers_quantile.is_some() {
            return Err(config("moers_quantile is only valid for RejectionMoers"));
        }
        if self.marginal_mode == MarginalMode::EulerPath
            && matches!(self.kind, RejectionAlg1 | RejectionAlg2 | RejectionMoers)
        {
            for &t in &self.time_grid {
                increments_for(t, self.step)?;
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding, which includes the seed.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("spec serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| config(format!("bad experiment spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    fn search(&self) -> SearchConfig {
        SearchConfig {
            max_t: self.search_max_t.unwrap_or(SearchConfig::default().max_t),
            ..SearchConfig::default()
        }
    }
}

/// Number of Euler steps to reach `t` with `step`, which must divide it.
fn increments_for(t: f64, step: f64) -> Result<usize> {
    let n = (t / step).round();
    if !(n >= 1.0) || ((n * step - t) / t).abs() > 1e-9 {
        return Err(config(format!("time {t} is not a multiple of step {step}")));
    }
    Ok(n as usize)
}

/// Subsampling stride from the simulation step to the grid `1/n`.
fn stride_for(n: u64, step: f64) -> Result<usize> {
    let s = (1.0 / (n as f64 * step)).round();
    if !(s >= 1.0) || ((s * step * n as f64) - 1.0).abs() > 1e-9 {
        return Err(config(format!("grid 1/{n} is not a multiple of step {step}")));
    }
    Ok(s as usize)
}

pub fn hurst_label(h: HurstParam) -> String {
    format!("H={h}")
}

pub fn theta_label(theta: f64) -> String {
    format!("theta={theta}")
}

/// One Monte Carlo or deterministic cell to evaluate.
enum Cell<'a> {
    Skip(String),
    Trials(Box<dyn TrialSource + 'a>),
}

/// Per-replication work of a cell. Draws come in pairs so path modes can use
/// both halves of one transform.
trait TrialSource: Send + Sync {
    fn pair(&self, rng: &mut Stream) -> Result<[f64; 2]>;
}

struct ExactTrial<F: Fn(f64) -> bool + Send + Sync> {
    sampler: ExactMarginalSampler,
    rejects: F,
}

impl<F: Fn(f64) -> bool + Send + Sync> TrialSource for ExactTrial<F> {
    fn pair(&self, rng: &mut Stream) -> Result<[f64; 2]> {
        let a = self.sampler.sample(rng);
        let b = self.sampler.sample(rng);
        Ok([(self.rejects)(a) as u8 as f64, (self.rejects)(b) as u8 as f64])
    }
}

/// Shared fBm generator plus a per-path evaluation.
struct PathTrial<'g, F: Fn(&SamplePath) -> Result<f64> + Send + Sync> {
    generator: &'g FbmGenerator,
    eval: F,
}

impl<F: Fn(&SamplePath) -> Result<f64> + Send + Sync> TrialSource for PathTrial<'_, F> {
    fn pair(&self, rng: &mut Stream) -> Result<[f64; 2]> {
        let (a, b) = self.generator.sample_pair(rng);
        Ok([(self.eval)(&a)?, (self.eval)(&b)?])
    }
}

/// Runs `spec` on a pool of `workers` threads.
pub fn run_experiment(spec: &ExperimentSpec, workers: usize) -> Result<TableReport> {
    spec.validate()?;
    if workers < 1 {
        return Err(Error::invalid("workers", "must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let started = Instant::now();
    let mut report = pool.install(|| match spec.kind {
        ExperimentKind::ThresholdT0 | ExperimentKind::ThresholdT0Tilde => run_threshold(spec),
        ExperimentKind::EstimatorQuality => run_estimators(spec),
        _ => run_rejection(spec),
    })?;
    report.elapsed_seconds = started.elapsed().as_secs_f64();
    Ok(report)
}

/// Runs several specs and stacks their rows.
pub fn run_experiments(specs: &[ExperimentSpec], workers: usize) -> Result<TableReport> {
    let reports = specs
        .iter()
        .map(|s| run_experiment(s, workers))
        .collect::<Result<Vec<_>>>()?;
    TableReport::stack(reports)
}

fn empty_report(spec: &ExperimentSpec, rows: Vec<String>, columns: Vec<String>) -> TableReport {
    let (nr, nc) = (rows.len(), columns.len());
    TableReport {
        kind: spec.kind,
        spec_digest: spec.digest(),
        seed: spec.seed,
        replications: spec.replications,
        row_labels: rows,
        column_labels: columns,
        cells: vec![vec![None; nc]; nr],
        standard_errors: None,
        flags: Vec::new(),
        elapsed_seconds: 0.0,
    }
}

fn run_threshold(spec: &ExperimentSpec) -> Result<TableReport> {
    let row = match spec.theta0 {
        Some(t0) => format!("theta0={t0}"),
        None => format!("alpha={}", spec.alpha.value()),
    };
    let columns: Vec<String> = spec.hurst_grid.iter().map(|&h| hurst_label(h)).collect();
    let mut report = empty_report(spec, vec![row.clone()], columns.clone());
    let search = spec.search();
    let values: Vec<Result<f64>> = spec
        .hurst_grid
        .par_iter()
        .map(|&h| match spec.theta0 {
            Some(t0) => find_t0_tilde(spec.alpha, t0, spec.x0, h, &search),
            None => find_t0(spec.alpha, spec.x0, h, &search),
        })
        .collect();
    for (j, value) in values.into_iter().enumerate() {
        match value {
            Ok(v) => report.cells[0][j] = Some(v),
            Err(Error::SearchExhausted { max_t }) => report.flags.push(CellFlag {
                row: row.clone(),
                column: columns[j].clone(),
                reason: format!("out of range: guard horizon exceeds the search bound {max_t:e}"),
            }),
            Err(e) => {
                return Err(Error::Cell {
                    row: row.clone(),
                    column: columns[j].clone(),
                    source: Box::new(e),
                })
            }
        }
    }
    Ok(report)
}

/// Guard horizon for one Hurst index, or the message explaining why it is unavailable.
fn guard_for(spec: &ExperimentSpec, h: HurstParam) -> Result<std::result::Result<f64, String>> {
    let search = spec.search();
    let found = match spec.kind {
        ExperimentKind::RejectionAlg1 => find_t0(spec.alpha, spec.x0, h, &search),
        ExperimentKind::RejectionAlg2 => {
            find_t0_tilde(spec.alpha, spec.theta0.expect("validated"), spec.x0, h, &search)
        }
        _ => return Ok(Ok(0.0)),
    };
    match found {
        Ok(v) => Ok(Ok(v)),
        Err(Error::SearchExhausted { max_t }) => Ok(Err(format!(
            "guard horizon exceeds the search bound {max_t:e}"
        ))),
        Err(e) => Err(e),
    }
}

fn moers_threshold(spec: &ExperimentSpec, h: HurstParam) -> Result<f64> {
    match spec.moers_quantile {
        Some(q) => Ok(q),
        None => moers_limit_quantile(
            h,
            Probability::new(1.0 - spec.alpha.value())?,
            MOERS_QUANTILE_REPLICATIONS,
            MOERS_QUANTILE_GRID,
            spec.seed,
        ),
    }
}

fn run_rejection(spec: &ExperimentSpec) -> Result<TableReport> {
    let mut rows = Vec::new();
    let mut row_params = Vec::new();
    for &h in &spec.hurst_grid {
        for &t in &spec.time_grid {
            rows.push(format!("{},t={t}", hurst_label(h)));
            row_params.push((h, t));
        }
    }
    let columns: Vec<String> = spec.theta_grid.iter().map(|&th| theta_label(th)).collect();
    let mut report = empty_report(spec, rows, columns);

    let mut guards = Vec::new();
    let mut psi = Vec::new();
    for &h in &spec.hurst_grid {
        guards.push(guard_for(spec, h)?);
        psi.push(if spec.kind == ExperimentKind::RejectionMoers {
            moers_threshold(spec, h)?
        } else {
            0.0
        });
    }
    let generators = if spec.marginal_mode == MarginalMode::EulerPath {
        row_params
            .iter()
            .map(|&(h, t)| FbmGenerator::new(h, spec.step, increments_for(t, spec.step)?))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };

    let mut cells: Vec<Cell> = Vec::new();
    let mut coords = Vec::new();
    for (r, &(h, t)) in row_params.iter().enumerate() {
        let hi = r / spec.time_grid.len();
        for (c, &theta) in spec.theta_grid.iter().enumerate() {
            let generator = generators.get(r);
            cells.push(rejection_cell(spec, h, t, theta, &guards[hi], psi[hi], generator)?);
            coords.push((report.row_labels[r].clone(), report.column_labels[c].clone()));
        }
    }
    let ncols = report.column_labels.len();
    let mut se = vec![vec![None; ncols]; report.row_labels.len()];
    for (i, st) in evaluate(spec, &cells, &coords)?.into_iter().enumerate() {
        let (r, c) = (i / ncols, i % ncols);
        report.cells[r][c] = st.mean;
        se[r][c] = st.mean_se;
        if let Some(reason) = st.skipped {
            report.flags.push(CellFlag {
                row: coords[i].0.clone(),
                column: coords[i].1.clone(),
                reason,
            });
        }
    }
    report.standard_errors = Some(se);
    Ok(report)
}

fn rejection_cell<'a>(
    spec: &ExperimentSpec,
    h: HurstParam,
    t: f64,
    theta: f64,
    guard: &std::result::Result<f64, String>,
    psi: f64,
    generator: Option<&'a FbmGenerator>,
) -> Result<Cell<'a>> {
    let params = ModelParams::new(theta, spec.x0, h)?;
    // Decision from ln|X_t|, the form available for explosive Euler paths.
    let decide: Box<dyn Fn(f64) -> bool + Send + Sync> = match spec.kind {
        ExperimentKind::RejectionAlg1 | ExperimentKind::RejectionAlg2 => {
            let guard = match guard {
                Ok(g) => *g,
                Err(msg) => return Ok(Cell::Skip(msg.clone())),
            };
            let prepared = if spec.kind == ExperimentKind::RejectionAlg1 {
                PositiveDriftTest::with_guard(spec.x0, h, spec.alpha, t, guard).map(|p| {
                    Box::new(move |ln_abs: f64| p.decide_statistic(z_from_ln_abs(ln_abs, t)).rejects())
                        as Box<dyn Fn(f64) -> bool + Send + Sync>
                })
            } else {
                let theta0 = spec.theta0.expect("validated");
                Theta0DriftTest::with_guard(spec.x0, h, spec.alpha, theta0, t, guard).map(|p| {
                    Box::new(move |ln_abs: f64| p.decide_statistic(z_from_ln_abs(ln_abs, t)).rejects())
                        as Box<dyn Fn(f64) -> bool + Send + Sync>
                })
            };
            match prepared {
                Ok(f) => f,
                Err(e @ Error::GuardViolation { .. }) => return Ok(Cell::Skip(e.to_string())),
                Err(e) => return Err(e),
            }
        }
        ExperimentKind::RejectionMoers => {
            let generator = generator.expect("EulerPath validated");
            return Ok(Cell::Trials(Box::new(PathTrial {
                generator,
                eval: move |b: &SamplePath| {
                    let x = euler_path_scaled(&params, b)?;
                    let stat = moers_statistic(&x, h)?;
                    Ok((x.horizon() * stat > psi) as u8 as f64)
                },
            })));
        }
        _ => unreachable!("rejection kinds only"),
    };
    Ok(match spec.marginal_mode {
        MarginalMode::ExactGaussian => {
            let sampler = ExactMarginalSampler::new(&params, t)?;
            Cell::Trials(Box::new(ExactTrial {
                sampler,
                rejects: move |x: f64| decide(x.abs().ln()),
            }))
        }
        MarginalMode::EulerPath => {
            let generator = generator.expect("generator built for EulerPath");
            Cell::Trials(Box::new(PathTrial {
                generator,
                eval: move |b: &SamplePath| {
                    let x = euler_path_scaled(&params, b)?;
                    Ok(decide(x.ln_abs(x.len() - 1)) as u8 as f64)
                },
            }))
        }
    })
}

fn run_estimators(spec: &ExperimentSpec) -> Result<TableReport> {
    let m = spec.m_exponent.expect("validated");
    let mut rows = Vec::new();
    for &h in &spec.hurst_grid {
        for &theta in &spec.theta_grid {
            rows.push(format!("{},{},mean", hurst_label(h), theta_label(theta)));
            rows.push(format!("{},{},sd", hurst_label(h), theta_label(theta)));
        }
    }
    let columns: Vec<String> = spec.time_grid.iter().map(|&n| format!("n={n}")).collect();
    let mut report = empty_report(spec, rows, columns);

    // One generator per (H, n); the same one serves every θ.
    let mut generators = Vec::new();
    for &h in &spec.hurst_grid {
        for &n in &spec.time_grid {
            let horizon = n.powi(m as i32 - 1);
            generators.push(FbmGenerator::new(h, spec.step, increments_for(horizon, spec.step)?)?);
        }
    }
    let per_row = spec.time_grid.len();
    let mut cells: Vec<Cell> = Vec::new();
    let mut coords = Vec::new();
    for (hi, &h) in spec.hurst_grid.iter().enumerate() {
        for (ti, &theta) in spec.theta_grid.iter().enumerate() {
            let params = ModelParams::new(theta, spec.x0, h)?;
            for (ni, &n) in spec.time_grid.iter().enumerate() {
                let n = n as u64;
                let stride = stride_for(n, spec.step)?;
                let generator = &generators[hi * per_row + ni];
                cells.push(Cell::Trials(Box::new(PathTrial {
                    generator,
                    eval: move |b: &SamplePath| {
                        let x = euler_path_scaled(&params, b)?.subsample(stride)?;
                        let est = if theta < 0.0 {
                            theta_hat_3(&x, h, n, m)?
                        } else {
                            theta_hat_4(&x, h, n, m)?
                        };
                        Ok(est.value)
                    },
                })));
                let mean_row = 2 * (hi * spec.theta_grid.len() + ti);
                coords.push((report.row_labels[mean_row].clone(), report.column_labels[ni].clone()));
            }
        }
    }
    let stats = evaluate(spec, &cells, &coords)?;
    let mut se = vec![vec![None; per_row]; report.row_labels.len()];
    for (i, st) in stats.into_iter().enumerate() {
        let (pair, c) = (i / per_row, i % per_row);
        report.cells[2 * pair][c] = st.mean;
        report.cells[2 * pair + 1][c] = st.sd;
        se[2 * pair][c] = st.mean_se;
    }
    report.standard_errors = Some(se);
    Ok(report)
}

#[derive(Debug, Default)]
struct CellStats {
    mean: Option<f64>,
    /// Binomial SE for 0/1 outcomes, else the SE of the mean.
    mean_se: Option<f64>,
    sd: Option<f64>,
    skipped: Option<String>,
}

/// Evaluates every cell in parallel. Outcomes are gathered in task order and
/// reduced sequentially, so the result does not depend on the pool size.
fn evaluate(spec: &ExperimentSpec, cells: &[Cell], coords: &[(String, String)]) -> Result<Vec<CellStats>> {
    let reps = spec.replications;
    let pairs = reps.div_ceil(2);
    let tasks: Vec<(usize, usize)> = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| matches!(c, Cell::Trials(_)))
        .flat_map(|(i, _)| (0..pairs).map(move |p| (i, p)))
        .collect();
    let outcomes: Vec<[f64; 2]> = tasks
        .par_iter()
        .map(|&(i, p)| {
            let Cell::Trials(source) = &cells[i] else {
                unreachable!("only trial cells are scheduled")
            };
            let mut rng = replication_stream(spec.seed, i as u64, p as u64);
            source.pair(&mut rng).map_err(|e| Error::Cell {
                row: coords[i].0.clone(),
                column: coords[i].1.clone(),
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let mut chunks = outcomes.chunks(pairs);
    let stats = cells
        .iter()
        .map(|cell| match cell {
            Cell::Skip(reason) => CellStats {
                skipped: Some(reason.clone()),
                ..CellStats::default()
            },
            Cell::Trials(_) => {
                let chunk = chunks.next().expect("one chunk per trial cell");
                let values: Vec<f64> = chunk.iter().flatten().copied().take(reps).collect();
                summarize(&values)
            }
        })
        .collect();
    Ok(stats)
}

fn summarize(values: &[f64]) -> CellStats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let binary = values.iter().all(|&v| v == 0.0 || v == 1.0);
    let mean_se = if binary {
        (mean * (1.0 - mean) / n).sqrt()
    } else {
        (var / n).sqrt()
    };
    CellStats {
        mean: Some(mean),
        mean_se: Some(mean_se),
        sd: Some(var.sqrt()),
        skipped: None,
    }
}
