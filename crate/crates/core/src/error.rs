use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside the range its owner accepts.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A numeric result would not fit in a 64-bit float.
    #[error("range error: {0}")]
    Range(String),

    /// The function is undefined at the requested point.
    #[error("domain error: {0}")]
    Domain(String),

    /// An Euler or solution-formula path left the representable range.
    #[error("path diverged at index {index} (|X| > 1e300 or non-finite)")]
    DivergedPath { index: usize },

    /// The circulant embedding produced a negative spectral coefficient.
    #[error("circulant embedding failed: eigenvalue {value:e} at index {index}")]
    Embedding { index: usize, value: f64 },

    /// The threshold equation has no root in (0, 1) at this horizon.
    #[error("no bracket: g(c=0) = {at_zero}, g(c=1) = {at_one}, target {target}; the test can be applied only for t > t0")]
    NoBracket { at_zero: f64, at_one: f64, target: f64 },

    /// A sign change of the guard equations may lie beyond the scan bound.
    #[error("search exhausted: a guard equation is still unresolved at max_t = {max_t:e}")]
    SearchExhausted { max_t: f64 },

    /// Observation time at or below the guard horizon.
    #[error("t = {t} <= {name} = {required:.4}: {test} inapplicable (requires t > {name})")]
    GuardViolation {
        t: f64,
        required: f64,
        name: &'static str,
        test: &'static str,
    },

    /// An estimator denominator vanished.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Two tables or a path grid do not have the expected shape.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Invalid configuration (experiment spec, sizes, file headers).
    #[error("configuration error: {0}")]
    Config(String),

    /// A Monte Carlo cell failed; carries the cell coordinates.
    #[error("cell ({row}, {column}) failed: {source}")]
    Cell {
        row: String,
        column: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::Domain(_)
                | Error::GuardViolation { .. }
                | Error::NoBracket { .. }
                | Error::Shape(_)
                | Error::Config(_)
        )
    }
}
