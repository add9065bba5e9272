use crate::fit::FitReport;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A model configuration violates one of its structural invariants.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// A numeric argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data fails a precondition (too few records, empty grid, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A requested sweep design cannot be constructed.
    #[error("infeasible design: {0}")]
    InfeasibleDesign(String),

    /// Every fit restart failed to produce a finite objective. Carries the
    /// best-effort report so callers can still inspect it.
    #[error("fit did not converge: no restart reached a finite objective")]
    NonConvergence { best_effort: Box<FitReport> },

    /// A record file failed to parse. `row` is 1-based and counts the header.
    #[error("parse error in {source_name} row {row}: {message}")]
    Parse {
        source_name: String,
        row: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
