use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error("non-numeric cell {value:?} in column {column:?} at data row {row}")]
    NonNumeric {
        column: String,
        row: usize,
        value: String,
    },

    #[error("missing value in column {column:?} at data row {row}")]
    Missing { column: String, row: usize },

    #[error("dataset has no rows")]
    EmptyDataset,

    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("formula syntax error: {0}")]
    FormulaSyntax(String),

    #[error("unknown column {0:?}")]
    UnknownColumn(String),

    #[error("response {0:?} cannot also be a term")]
    ResponseAsTerm(String),

    #[error("formula resolves to no terms")]
    EmptyTerms,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("design is rank deficient at column {column:?}")]
    RankDeficient { column: String },

    #[error("insufficient data: {n} rows for {k} coefficients")]
    InsufficientData { n: usize, k: usize },

    #[error("saturated fit: residual sum of squares is zero")]
    SaturatedFit,

    #[error("design columns do not match the fitted model: {0}")]
    ColumnMismatch(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("dummy column {column:?} is constant")]
    DegenerateEncoding { column: String },

    #[error("best-subset search needs {needed} fits, above the cap of {cap}; lower max_size")]
    BudgetExceeded { needed: u128, cap: u64 },

    #[error("coordinate descent did not converge in {iterations} sweeps (last change {last_change:e})")]
    NotConverged {
        iterations: usize,
        last_change: f64,
        last_iterate: Vec<f64>,
    },

    #[error("no successful runs for method {0:?}")]
    NoSuccessfulRuns(String),

    #[error("unknown method {0}")]
    UnknownMethod(String),

    #[error("failed to write {path}: {message}")]
    Write { path: PathBuf, message: String },
}

impl Error {
    /// Whether the error stems from bad input rather than a numerical or internal failure.
    pub fn is_user_error(&self) -> bool {
        !matches!(
            self,
            Error::RankDeficient { .. }
                | Error::SaturatedFit
                | Error::NotConverged { .. }
                | Error::LengthMismatch(..)
                | Error::ColumnMismatch(_)
        )
    }
}
