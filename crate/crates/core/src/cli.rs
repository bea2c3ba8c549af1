//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for argument or validation errors, 1 for
//! runtime failures. JSON outputs carry `"schema": "fou-lab/1"`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::estimators::{
    moers_limit_quantile, moers_statistic, theta_hat_1, theta_hat_2, theta_hat_3, theta_hat_4,
    EstimateReport, EstimatorId,
};
use crate::experiments::{
    emit_csv, preset, run_experiments, ExperimentKind, ExperimentSpec, MarginalMode,
    TableReport, DEFAULT_SEED,
};
use crate::fbm::{FbmGenerator, HurstParam, SamplePath};
use crate::fou::{euler_path, ModelParams};
use crate::marginals::Probability;
use crate::rng::stream;
use crate::sign_test::{PositiveDriftTest, SearchConfig, TestDecision, Theta0DriftTest};

pub const SCHEMA: &str = "fou-lab/1";

#[derive(Debug, Parser)]
#[command(
    name = "fou-lab",
    version,
    about = "Simulation, drift-sign tests and drift estimation for the fractional Ornstein-Uhlenbeck process dX = θX dt + dB^H"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate an fBm path, or an fOU path by the Euler scheme when --theta is given.
    Simulate(SimulateArgs),
    /// Test H0: θ ≤ 0 against H1: θ > 0 from one observation X_t.
    TestSign(TestSignArgs),
    /// Test H0: θ ≥ θ0 against H1: θ ≤ 0 from one observation X_t.
    TestTheta0(TestTheta0Args),
    /// Estimate θ from a path written by `simulate`.
    Estimate(EstimateArgs),
    /// Reproduce a reference table or run an experiment spec.
    Tables(TablesArgs),
    /// Monte Carlo quantile of the Moers limit law.
    MoersQuantile(MoersArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Random seed (unsigned 64-bit); defaults to FOU_LAB_SEED, then 2024.
    #[arg(long, env = "FOU_LAB_SEED")]
    seed: Option<u64>,
    /// Write the result to this file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl Common {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PathFormat {
    Json,
    Binary,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Hurst index H, in (0, 1).
    #[arg(long)]
    hurst: f64,
    /// Grid step h in time units, > 0.
    #[arg(long)]
    step: f64,
    /// Number of increments N ≥ 1; the path has N + 1 points on [0, N·h].
    #[arg(long)]
    points: usize,
    /// Drift θ (any real). Without it an fBm path is produced.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Initial value x0 of the fOU path (any real).
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    x0: f64,
    /// Output format; binary is the FOUPATH1 dump (magic, step, values as little-endian f64).
    #[arg(long, value_enum, default_value = "json")]
    format: PathFormat,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct DecisionArgs {
    /// Observed value X_t (finite real).
    #[arg(long = "xt", allow_hyphen_values = true)]
    x_t: f64,
    /// Observation time t > 1; must exceed the guard horizon.
    #[arg(long = "t")]
    t: f64,
    /// Initial value x0 (any real).
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    x0: f64,
    /// Hurst index H, in (0, 1).
    #[arg(long)]
    hurst: f64,
    /// Significance level α, in (0, 1).
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Upper end of the guard-horizon scan in time units, > 1.
    #[arg(long, default_value_t = 1e5)]
    search_max_t: f64,
    /// Write the result to this file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TestSignArgs {
    #[command(flatten)]
    decision: DecisionArgs,
}

#[derive(Debug, Args)]
struct TestTheta0Args {
    #[command(flatten)]
    decision: DecisionArgs,
    /// Null boundary θ0, in [0, 1).
    #[arg(long)]
    theta0: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EstimatorArg {
    /// Ergodic estimator, for θ < 0.
    Erg1,
    /// Non-ergodic estimator, for θ > 0.
    NonErg2,
    /// Discrete ergodic estimator on the grid k/n, 0 ≤ k ≤ n^m.
    DiscErg3,
    /// Discrete non-ergodic estimator on the grid k/n, 0 ≤ k ≤ n^m.
    DiscNonErg4,
    /// Moers statistic; compare T times the value with the limit quantile.
    Moers,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Path file written by `simulate` (JSON or FOUPATH1 binary).
    #[arg(long)]
    input: PathBuf,
    /// Hurst index H, in (0, 1).
    #[arg(long)]
    hurst: f64,
    #[arg(long, value_enum)]
    estimator: EstimatorArg,
    /// Grid density n ≥ 1 of the discrete estimators (step 1/n).
    #[arg(long)]
    n: Option<u64>,
    /// Exponent m ≥ 2 of the discrete estimators (horizon n^(m-1)).
    #[arg(long, default_value_t = 2)]
    m: u32,
    /// Write the result to this file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Euler,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct TablesArgs {
    /// Built-in table preset, table1 … table8.
    #[arg(long, required_unless_present = "spec", conflicts_with = "spec")]
    name: Option<String>,
    /// JSON experiment spec file instead of a preset.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Significance level α in (0, 1); repeat to stack threshold tables.
    #[arg(long)]
    alpha: Vec<f64>,
    /// Replications per cell, ≥ 1.
    #[arg(long)]
    replications: Option<usize>,
    /// Simulation step h in time units, > 0; horizons must be multiples of it.
    #[arg(long)]
    step: Option<f64>,
    /// How X_t is drawn in rejection tables: exact Gaussian law or Euler path.
    #[arg(long, value_enum)]
    marginal_mode: Option<ModeArg>,
    /// Hurst grid, each in (0, 1); repeat for several.
    #[arg(long)]
    hurst: Vec<f64>,
    /// Drift grid θ; repeat for several.
    #[arg(long, allow_hyphen_values = true)]
    theta: Vec<f64>,
    /// Time grid t > 1 (or densities n for estimator tables); repeat for several.
    #[arg(long)]
    time: Vec<f64>,
    /// Critical value ψ of the Moers test (real); estimated by simulation if absent.
    #[arg(long)]
    moers_quantile: Option<f64>,
    /// Upper end of the guard-horizon scan in time units, > 1.
    #[arg(long)]
    search_max_t: Option<f64>,
    /// Worker threads, ≥ 1; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: TableFormat,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct MoersArgs {
    /// Hurst index H, in (0, 1).
    #[arg(long)]
    hurst: f64,
    /// Probability level of the quantile, in [0, 1].
    #[arg(long, default_value_t = 0.95)]
    prob: f64,
    /// Number of simulated fBm paths, ≥ 1000.
    #[arg(long, default_value_t = 20_000)]
    replications: usize,
    /// Grid intervals on [0, 1], ≥ 2.
    #[arg(long, default_value_t = 10_000)]
    grid_points: usize,
    /// Worker threads, ≥ 1; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    common: Common,
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Simulate(a) => simulate(a, stdout),
        Command::TestSign(a) => {
            let d = &a.decision;
            let search = search(d.search_max_t)?;
            let (hurst, alpha) = (HurstParam::new(d.hurst)?, Probability::new(d.alpha)?);
            let decision = PositiveDriftTest::new(d.x0, hurst, alpha, d.t, &search)?.decide(d.x_t)?;
            write_decision(&decision, d.output.as_deref(), stdout)
        }
        Command::TestTheta0(a) => {
            let d = &a.decision;
            let search = search(d.search_max_t)?;
            let (hurst, alpha) = (HurstParam::new(d.hurst)?, Probability::new(d.alpha)?);
            let decision =
                Theta0DriftTest::new(d.x0, hurst, alpha, a.theta0, d.t, &search)?.decide(d.x_t)?;
            write_decision(&decision, d.output.as_deref(), stdout)
        }
        Command::Estimate(a) => estimate(a, stdout),
        Command::Tables(a) => tables(a, stdout),
        Command::MoersQuantile(a) => {
            let hurst = HurstParam::new(a.hurst)?;
            let prob = Probability::new(a.prob)?;
            let q = with_workers(a.workers, || {
                moers_limit_quantile(hurst, prob, a.replications, a.grid_points, a.common.seed())
            })?;
            let value = json!({
                "schema": SCHEMA,
                "hurst": a.hurst,
                "prob": a.prob,
                "replications": a.replications,
                "grid_points": a.grid_points,
                "seed": a.common.seed(),
                "quantile": q,
            });
            write_json(&value, a.common.output.as_deref(), stdout)
        }
    }
}

fn search(max_t: f64) -> Result<SearchConfig> {
    if !(max_t > 1.0 && max_t.is_finite()) {
        return Err(Error::invalid("search_max_t", format!("must exceed 1, got {max_t}")));
    }
    Ok(SearchConfig {
        max_t,
        ..SearchConfig::default()
    })
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let workers = resolve_workers(workers)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(f)
}

fn resolve_workers(workers: Option<usize>) -> Result<usize> {
    match workers {
        Some(0) => Err(Error::invalid("workers", "must be at least 1")),
        Some(w) => Ok(w),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn sink<'a>(path: Option<&Path>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(stdout),
    })
}

fn with_schema<T: Serialize>(value: &T) -> Result<Value> {
    let mut v = serde_json::to_value(value)?;
    if let Value::Object(map) = &mut v {
        map.insert("schema".into(), Value::String(SCHEMA.into()));
    }
    Ok(v)
}

fn write_json(value: &Value, path: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let mut out = sink(path, stdout)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn write_decision(decision: &TestDecision, path: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    write_json(&with_schema(decision)?, path, stdout)
}

/// Path file contents as written by `simulate --format json`.
#[derive(Debug, Serialize, serde::Deserialize)]
struct PathDocument {
    schema: String,
    process: String,
    hurst: f64,
    #[serde(default)]
    theta: Option<f64>,
    #[serde(default)]
    x0: Option<f64>,
    step: f64,
    seed: u64,
    values: Vec<f64>,
}

/// The path `simulate` produces for these parameters.
pub fn simulate_path(
    hurst: HurstParam,
    step: f64,
    points: usize,
    drift: Option<(f64, f64)>,
    seed: u64,
) -> Result<SamplePath> {
    let b = FbmGenerator::new(hurst, step, points)?.sample(&mut stream(seed, 0));
    match drift {
        None => Ok(b),
        Some((theta, x0)) => euler_path(&ModelParams::new(theta, x0, hurst)?, &b),
    }
}

fn simulate(a: SimulateArgs, stdout: &mut dyn Write) -> Result<()> {
    let hurst = HurstParam::new(a.hurst)?;
    let seed = a.common.seed();
    let path = simulate_path(hurst, a.step, a.points, a.theta.map(|t| (t, a.x0)), seed)?;
    match a.format {
        PathFormat::Binary => {
            let mut out = sink(a.common.output.as_deref(), stdout)?;
            path.write_binary(&mut out)
        }
        PathFormat::Json => {
            let doc = PathDocument {
                schema: SCHEMA.into(),
                process: if a.theta.is_some() { "fou" } else { "fbm" }.into(),
                hurst: a.hurst,
                theta: a.theta,
                x0: a.theta.map(|_| a.x0),
                step: path.step(),
                seed,
                values: path.into_values(),
            };
            write_json(&serde_json::to_value(doc)?, a.common.output.as_deref(), stdout)
        }
    }
}

/// Reads a JSON path document or a FOUPATH1 dump.
pub fn read_path_file(path: &Path) -> Result<SamplePath> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    if bytes.starts_with(b"FOUPATH1") {
        return SamplePath::read_binary(io::Cursor::new(bytes));
    }
    let doc: PathDocument = serde_json::from_slice(&bytes)
        .map_err(|e| Error::Config(format!("{} is neither FOUPATH1 nor a path document: {e}", path.display())))?;
    SamplePath::new(doc.step, doc.values)
}

fn estimate(a: EstimateArgs, stdout: &mut dyn Write) -> Result<()> {
    let hurst = HurstParam::new(a.hurst)?;
    let path = read_path_file(&a.input)?;
    let need_n = || a.n.ok_or_else(|| Error::invalid("n", "required by the discrete estimators"));
    let report = match a.estimator {
        EstimatorArg::Erg1 => theta_hat_1(&path, hurst)?,
        EstimatorArg::NonErg2 => theta_hat_2(&path, hurst)?,
        EstimatorArg::DiscErg3 => theta_hat_3(&path, hurst, need_n()?, a.m)?,
        EstimatorArg::DiscNonErg4 => theta_hat_4(&path, hurst, need_n()?, a.m)?,
        EstimatorArg::Moers => EstimateReport {
            estimator_id: EstimatorId::Moers,
            value: moers_statistic(&path, hurst)?,
            horizon_t: path.horizon(),
            m_exponent: None,
            h_step: path.step(),
        },
    };
    write_json(&with_schema(&report)?, a.output.as_deref(), stdout)
}

/// Specs for `tables` after applying the flag overrides.
fn table_specs(a: &TablesArgs) -> Result<Vec<ExperimentSpec>> {
    let mut specs = match (&a.name, &a.spec) {
        (Some(name), None) => preset(name)?,
        (None, Some(path)) => {
            let mut text = String::new();
            File::open(path)?.read_to_string(&mut text)?;
            vec![ExperimentSpec::from_json(&text)?]
        }
        _ => return Err(Error::Config("give exactly one of --name and --spec".into())),
    };
    if !a.alpha.is_empty() {
        let alphas = a
            .alpha
            .iter()
            .map(|&x| Probability::new(x))
            .collect::<Result<Vec<_>>>()?;
        if alphas.len() > 1 && specs.iter().any(|s| s.kind != ExperimentKind::ThresholdT0) {
            return Err(Error::Config("several --alpha values are only supported for t0 threshold tables".into()));
        }
        let template = specs[0].clone();
        if template.kind == ExperimentKind::ThresholdT0 {
            specs = alphas.into_iter().map(|alpha| ExperimentSpec { alpha, ..template.clone() }).collect();
        } else {
            for s in &mut specs {
                s.alpha = alphas[0];
            }
        }
    }
    let hurst = a.hurst.iter().map(|&h| HurstParam::new(h)).collect::<Result<Vec<_>>>()?;
    for s in &mut specs {
        if let Some(r) = a.replications {
            s.replications = r;
        }
        if let Some(h) = a.step {
            s.step = h;
        }
        if let Some(m) = a.marginal_mode {
            s.marginal_mode = match m {
                ModeArg::Exact => MarginalMode::ExactGaussian,
                ModeArg::Euler => MarginalMode::EulerPath,
            };
        }
        if !hurst.is_empty() {
            s.hurst_grid = hurst.clone();
        }
        if !a.theta.is_empty() {
            s.theta_grid = a.theta.clone();
        }
        if !a.time.is_empty() {
            s.time_grid = a.time.clone();
        }
        if a.moers_quantile.is_some() {
            s.moers_quantile = a.moers_quantile;
        }
        if a.search_max_t.is_some() {
            s.search_max_t = a.search_max_t;
        }
        if let Some(seed) = a.common.seed {
            s.seed = seed;
        }
        s.validate()?;
    }
    Ok(specs)
}

fn tables(a: TablesArgs, stdout: &mut dyn Write) -> Result<()> {
    let specs = table_specs(&a)?;
    let report: TableReport = run_experiments(&specs, resolve_workers(a.workers)?)?;
    match a.format {
        TableFormat::Csv => {
            let out = sink(a.common.output.as_deref(), stdout)?;
            emit_csv(&report, out)
        }
        TableFormat::Json => write_json(&with_schema(&report)?, a.common.output.as_deref(), stdout),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("fou-lab").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn guard_violation_exits_with_two() {
        let (code, _, err) = run_capture(&["test-sign", "--xt", "3.2", "--t", "1.0", "--hurst", "0.5"]);
        assert_eq!(code, 2);
        assert!(err.contains("t0 = 1.0889"), "{err}");
    }

    #[test]
    fn bad_flags_exit_with_two() {
        assert_eq!(run_capture(&["test-sign", "--xt", "1"]).0, 2);
        assert_eq!(run_capture(&["test-sign", "--xt", "1", "--t", "50", "--hurst", "1.5"]).0, 2);
        assert_eq!(run_capture(&["tables", "--name", "table9"]).0, 2);
    }

    #[test]
    fn decision_json_is_flat() {
        let (code, out, _) = run_capture(&["test-sign", "--xt", "3.2", "--t", "100", "--x0", "1", "--hurst", "0.5", "--alpha", "0.05"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        for key in ["statistic_z", "g_value", "alpha", "verdict", "t_used", "guard_t0"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["verdict"], "AcceptNull");
    }

    #[test]
    fn help_mentions_ranges() {
        let (code, out, _) = run_capture(&["test-theta0", "--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("in [0, 1)") && out.contains("t > 1"), "{out}");
    }
}
