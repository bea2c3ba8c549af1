//! Runs a table preset and compares it with the published values.
//!
//! Usage: `reproduce_table [table1..table8] [replications]`. Rejection tables
//! use exact marginal sampling here; the CLI `tables` command runs the Euler protocol.

use fou_lab::experiments::{
    emit_csv, preset, reference_table, run_experiments, ExperimentKind, MarginalMode, ToleranceRule,
};

fn main() -> fou_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "table1".into());
    let reps: Option<usize> = args.next().map(|r| r.parse().expect("integer replications"));
    let mut specs = preset(&name)?;
    for s in &mut specs {
        if matches!(s.kind, ExperimentKind::RejectionAlg1 | ExperimentKind::RejectionAlg2) {
            s.marginal_mode = MarginalMode::ExactGaussian;
        }
        if let Some(r) = reps {
            s.replications = r;
        }
    }
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = run_experiments(&specs, workers)?;
    emit_csv(&report, std::io::stdout().lock())?;

    let reference = reference_table(&name)?;
    let rule = match report.kind {
        ExperimentKind::ThresholdT0 => ToleranceRule::Absolute(1e-3),
        ExperimentKind::ThresholdT0Tilde => ToleranceRule::Relative(0.005),
        ExperimentKind::EstimatorQuality => ToleranceRule::Absolute(0.1),
        _ => ToleranceRule::BinomialSE(3.0),
    };
    let violations = report.verify_against_reference(&reference, rule)?;
    println!("\n{:.1}s, {} cells outside {rule:?}", report.elapsed_seconds, violations.len());
    for v in violations {
        println!("  {v}");
    }
    for f in &report.flags {
        println!("  NA [{}; {}]: {}", f.row, f.column, f.reason);
    }
    Ok(())
}
