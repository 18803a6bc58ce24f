use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::design_columns;
use crate::data::{Dataset, FormulaSpec};
use crate::error::{Error, Result};
use crate::linmod::{criterion, fit_ols, Criterion, DesignMatrix, OlsFit};

pub const DEFAULT_HARD_CAP: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestSubsetConfig {
    pub min_size: usize,
    pub max_size: usize,
    pub criterion: Criterion,
    /// Most subsets that may be enumerated.
    pub hard_cap: u64,
}

impl Default for BestSubsetConfig {
    fn default() -> Self {
        BestSubsetConfig {
            min_size: 1,
            max_size: 4,
            criterion: Criterion::Aic,
            hard_cap: DEFAULT_HARD_CAP,
        }
    }
}

impl BestSubsetConfig {
    pub fn new(min_size: usize, max_size: usize, criterion: Criterion) -> Self {
        BestSubsetConfig {
            min_size,
            max_size,
            criterion,
            ..Self::default()
        }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if !(1 <= self.min_size && self.min_size <= self.max_size && self.max_size <= p) {
            return Err(Error::InvalidConfig(format!(
                "subset sizes must satisfy 1 <= min ({}) <= max ({}) <= p ({p})",
                self.min_size, self.max_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestSubsetResult {
    /// Winning terms in formula order.
    pub selected: Vec<String>,
    pub fit: OlsFit,
    pub criterion_value: f64,
    pub subsets_evaluated: u64,
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// All `k`-subsets of `0..p` in lexicographic order.
fn combinations(p: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + p - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn design(cols: &[&[f64]], names: &[String], idx: &[usize], n: usize) -> Result<DesignMatrix> {
    DesignMatrix::with_intercept(n, idx.iter().map(|&j| (names[j].as_str(), cols[j])))
}

/// Lower criterion wins; exact ties go to the lexicographically smaller index list.
fn better(a: &(f64, Vec<usize>), b: &(f64, Vec<usize>)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Exhaustive search over every subset with size in the configured window.
pub fn best_subset(
    dataset: &Dataset,
    formula: &FormulaSpec,
    config: &BestSubsetConfig,
) -> Result<BestSubsetResult> {
    let (names, cols, y) = design_columns(dataset, formula)?;
    let p = names.len();
    config.validate(p)?;
    let needed: u128 = (config.min_size..=config.max_size)
        .map(|k| binomial(p, k))
        .fold(0u128, u128::saturating_add);
    if needed > u128::from(config.hard_cap) {
        return Err(Error::BudgetExceeded {
            needed,
            cap: config.hard_cap,
        });
    }

    let n = y.len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for k in config.min_size..=config.max_size {
        let winner = combinations(p, k)
            .into_par_iter()
            .filter_map(|idx| {
                let fit = fit_ols(&design(&cols, &names, &idx, n).ok()?, y).ok()?;
                let score = criterion(&fit, config.criterion).unwrap_or(f64::NEG_INFINITY);
                Some((score, idx))
            })
            .reduce_with(|a, b| if better(&b, &a) { b } else { a });
        if let Some(w) = winner {
            if best.as_ref().is_none_or(|b| better(&w, b)) {
                best = Some(w);
            }
        }
    }

    let (criterion_value, idx) = best.ok_or(Error::InsufficientData {
        n,
        k: config.min_size + 1,
    })?;
    let fit = fit_ols(&design(&cols, &names, &idx, n)?, y)?;
    Ok(BestSubsetResult {
        selected: idx.iter().map(|&j| names[j].clone()).collect(),
        fit,
        criterion_value,
        subsets_evaluated: needed as u64,
    })
}
