use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ExperimentKind;
use crate::error::{Error, Result};

/// A cell left empty, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFlag {
    pub row: String,
    pub column: String,
    pub reason: String,
}

/// A labelled table of results. `None` cells are not applicable and print as `NA`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableReport {
    pub kind: ExperimentKind,
    pub spec_digest: String,
    pub seed: u64,
    pub replications: usize,
    pub row_labels: Vec<String>,
    pub column_labels: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
    pub standard_errors: Option<Vec<Vec<Option<f64>>>>,
    pub flags: Vec<CellFlag>,
    pub elapsed_seconds: f64,
}

/// Equality ignores the wall-clock time.
impl PartialEq for TableReport {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.spec_digest == other.spec_digest
            && self.seed == other.seed
            && self.replications == other.replications
            && self.row_labels == other.row_labels
            && self.column_labels == other.column_labels
            && self.cells == other.cells
            && self.standard_errors == other.standard_errors
            && self.flags == other.flags
    }
}

impl TableReport {
    /// Table of fixed values, e.g. published results.
    pub fn from_values(
        kind: ExperimentKind,
        replications: usize,
        row_labels: Vec<String>,
        column_labels: Vec<String>,
        cells: Vec<Vec<Option<f64>>>,
    ) -> Result<Self> {
        let report = Self {
            kind,
            spec_digest: String::new(),
            seed: 0,
            replications,
            row_labels,
            column_labels,
            cells,
            standard_errors: None,
            flags: Vec::new(),
            elapsed_seconds: 0.0,
        };
        report.check_shape()?;
        Ok(report)
    }

    fn check_shape(&self) -> Result<()> {
        if self.cells.len() != self.row_labels.len()
            || self.cells.iter().any(|r| r.len() != self.column_labels.len())
        {
            return Err(Error::Shape(format!(
                "cells do not form a {}×{} matrix",
                self.row_labels.len(),
                self.column_labels.len()
            )));
        }
        Ok(())
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.row_labels.len(), self.column_labels.len())
    }

    pub fn cell(&self, row: &str, column: &str) -> Option<f64> {
        let r = self.row_labels.iter().position(|l| l == row)?;
        let c = self.column_labels.iter().position(|l| l == column)?;
        self.cells[r][c]
    }

    pub fn standard_error(&self, row: &str, column: &str) -> Option<f64> {
        let r = self.row_labels.iter().position(|l| l == row)?;
        let c = self.column_labels.iter().position(|l| l == column)?;
        self.standard_errors.as_ref()?[r][c]
    }

    /// Concatenates the rows of reports of one kind, merging their column labels.
    ///
    /// The digest of the result hashes the parts' digests in order.
    pub fn stack(reports: Vec<TableReport>) -> Result<TableReport> {
        let mut iter = reports.into_iter();
        let mut out = iter
            .next()
            .ok_or_else(|| Error::Shape("nothing to stack".into()))?;
        let mut digests = vec![out.spec_digest.clone()];
        for r in iter {
            if r.kind != out.kind {
                return Err(Error::Shape(format!("cannot stack {:?} onto {:?}", r.kind, out.kind)));
            }
            if r.replications != out.replications {
                return Err(Error::Shape("stacked reports need equal replication counts".into()));
            }
            // Row blocks with their own column grids are merged on the union of labels.
            let mut union = out.column_labels.clone();
            for c in &r.column_labels {
                if !union.contains(c) {
                    union.push(c.clone());
                }
            }
            out = out.reindex(&union);
            let r = r.reindex(&union);
            digests.push(r.spec_digest.clone());
            out.row_labels.extend(r.row_labels);
            out.cells.extend(r.cells);
            out.standard_errors = match (out.standard_errors.take(), r.standard_errors) {
                (Some(mut a), Some(b)) => {
                    a.extend(b);
                    Some(a)
                }
                _ => None,
            };
            out.flags.extend(r.flags);
            out.elapsed_seconds += r.elapsed_seconds;
        }
        if digests.len() > 1 {
            out.spec_digest = hex::encode(Sha256::digest(digests.join(",").as_bytes()));
        }
        Ok(out)
    }

    /// Same table laid out on `all`, a superset of its column labels.
    fn reindex(mut self, all: &[String]) -> TableReport {
        if all == self.column_labels {
            return self;
        }
        let index: Vec<Option<usize>> = all
            .iter()
            .map(|c| self.column_labels.iter().position(|x| x == c))
            .collect();
        let remap = |rows: Vec<Vec<Option<f64>>>| -> Vec<Vec<Option<f64>>> {
            rows.into_iter()
                .map(|row| index.iter().map(|i| i.and_then(|i| row[i])).collect())
                .collect()
        };
        self.cells = remap(self.cells);
        self.standard_errors = self.standard_errors.map(remap);
        self.column_labels = all.to_vec();
        self
    }

    /// Every cell of `self` that violates `rule` against `reference`.
    ///
    /// Cells missing from the reference are not checked; a reference value
    /// with no counterpart here is a violation.
    pub fn verify_against_reference(&self, reference: &TableReport, rule: ToleranceRule) -> Result<Vec<Violation>> {
        if self.shape() != reference.shape() {
            return Err(Error::Shape(format!(
                "report is {:?}, reference is {:?}",
                self.shape(),
                reference.shape()
            )));
        }
        let reps = self.replications.max(1) as f64;
        let mut out = Vec::new();
        for (r, row) in reference.cells.iter().enumerate() {
            for (c, expected) in row.iter().enumerate() {
                let Some(expected) = *expected else { continue };
                let allowed = rule.allowed(expected, reps);
                let observed = self.cells[r][c];
                let ok = observed.is_some_and(|o| (o - expected).abs() <= allowed);
                if !ok {
                    out.push(Violation {
                        row: self.row_labels[r].clone(),
                        column: self.column_labels[c].clone(),
                        observed,
                        expected,
                        allowed,
                    });
                }
            }
        }
        Ok(out)
    }
}

/// How far a cell may deviate from its reference value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ToleranceRule {
    Absolute(f64),
    /// Fraction of the reference magnitude.
    Relative(f64),
    /// `k·√(p(1−p)/replications)` with `p` the reference clamped to `[0.5/reps, 1−0.5/reps]`.
    BinomialSE(f64),
    /// `BinomialSE(k)` plus a fixed allowance.
    BinomialSEPlus { k: f64, slack: f64 },
}

impl ToleranceRule {
    pub fn allowed(self, expected: f64, replications: f64) -> f64 {
        let binomial = |k: f64| {
            let p = expected.clamp(0.5 / replications, 1.0 - 0.5 / replications);
            k * (p * (1.0 - p) / replications).sqrt()
        };
        match self {
            ToleranceRule::Absolute(eps) => eps,
            ToleranceRule::Relative(eps) => eps * expected.abs(),
            ToleranceRule::BinomialSE(k) => binomial(k),
            ToleranceRule::BinomialSEPlus { k, slack } => binomial(k) + slack,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub row: String,
    pub column: String,
    pub observed: Option<f64>,
    pub expected: f64,
    pub allowed: f64,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let observed = self.observed.map_or_else(|| "NA".to_string(), |o| format!("{o:.6}"));
        write!(
            f,
            "[{}; {}] observed {observed}, expected {} ± {:.6}",
            self.row, self.column, self.expected, self.allowed
        )
    }
}

/// `x` with `digits` significant digits in the style of C's `%g`.
pub fn format_g(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes the report as CSV: a header of column labels, one line per row, then
/// a `#` comment with the digest and seed.
pub fn emit_csv(report: &TableReport, mut out: impl Write) -> Result<()> {
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let mut header = vec![String::new()];
        header.extend(report.column_labels.iter().cloned());
        w.write_record(&header)?;
        for (label, row) in report.row_labels.iter().zip(&report.cells) {
            let mut record = vec![label.clone()];
            record.extend(row.iter().map(|v| v.map_or_else(|| "NA".to_string(), |x| format_g(x, 6))));
            w.write_record(&record)?;
        }
        w.flush()?;
    }
    writeln!(out, "# spec_digest={} seed={}", report.spec_digest, report.seed)?;
    out.flush()?;
    Ok(())
}
