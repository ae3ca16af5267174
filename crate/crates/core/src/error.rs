use std::path::PathBuf;

use crate::mapper::FeasibilityReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} inputs, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("invalid value: {0}")]
    Invalid(String),

    #[error("{role} capacitance {value_ff:.3} fF is below the technology minimum {c_min_ff} fF")]
    BelowMinimum {
        role: &'static str,
        value_ff: f64,
        c_min_ff: f64,
    },

    #[error("infeasible mapping:\n{0}")]
    Infeasible(FeasibilityReport),

    #[error("{what} = {value} outside [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("insufficient samples: need at least {need}, got {got}")]
    InsufficientSamples { need: usize, got: usize },

    #[error("variation draw {draw} produced non-positive capacitances after {attempts} attempts")]
    ResampleExhausted { draw: u64, attempts: usize },

    #[error("fixture {table}: {message}")]
    Fixture { table: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn fixture(table: &str, msg: impl Into<String>) -> Self {
        Error::Fixture {
            table: table.to_string(),
            message: msg.into(),
        }
    }
}
