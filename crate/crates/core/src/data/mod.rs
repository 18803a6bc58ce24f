//! Datasets, CSV ingestion, formulas and the synthetic generator.

mod csv_io;
mod formula;
mod synth;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use csv_io::{load_csv, read_csv, write_csv, LoadReport, NaPolicy};
pub use formula::{parse_formula, FormulaSpec, Terms};
pub use synth::{generate_synthetic, GroundTruth, SynthConfig, GENERATOR_NAME};

/// Named numeric columns of equal length.
///
/// Immutable once built: every cell is finite, names are unique and non-empty,
/// and there is at least one row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    column_names: Vec<String>,
    columns: Vec<Vec<f64>>,
    n_rows: usize,
}

impl Dataset {
    pub fn new(column_names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if column_names.len() != columns.len() {
            return Err(Error::InvalidDataset(format!(
                "{} names for {} columns",
                column_names.len(),
                columns.len()
            )));
        }
        if columns.is_empty() {
            return Err(Error::InvalidDataset("no columns".into()));
        }
        let mut seen = HashSet::new();
        for name in &column_names {
            if name.is_empty() {
                return Err(Error::InvalidDataset("empty column name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        let n_rows = columns[0].len();
        if n_rows == 0 {
            return Err(Error::EmptyDataset);
        }
        for (name, col) in column_names.iter().zip(&columns) {
            if col.len() != n_rows {
                return Err(Error::InvalidDataset(format!(
                    "column {name:?} has {} rows, expected {n_rows}",
                    col.len()
                )));
            }
            if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!(
                    "non-finite value in column {name:?} at row {row}"
                )));
            }
        }
        Ok(Dataset {
            column_names,
            columns,
            n_rows,
        })
    }

    pub fn from_pairs<S: Into<String>>(pairs: Vec<(S, Vec<f64>)>) -> Result<Self> {
        let (names, cols) = pairs.into_iter().map(|(n, c)| (n.into(), c)).unzip();
        Self::new(names, cols)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.index_of(name).map(|i| self.columns[i].as_slice())
    }

    /// Like [`Dataset::column`] but reports unknown names as an error.
    pub fn require(&self, name: &str) -> Result<&[f64]> {
        self.column(name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.column_names
            .iter()
            .map(String::as_str)
            .zip(self.columns.iter().map(Vec::as_slice))
    }

    /// New dataset holding only the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let columns = self
            .columns
            .iter()
            .map(|c| rows.iter().map(|&r| c[r]).collect())
            .collect();
        Self::new(self.column_names.clone(), columns)
    }
}
