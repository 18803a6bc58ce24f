//! Benchmark harness: runs methods over synthetic replications or a fixed
//! dataset, records fit and prediction metrics, aggregates them per method
//! and writes CSV/JSON reports.

mod methods;
mod report;

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use methods::{catalog, method_ids, parse_methods, Family, MethodSpec, Settings};
pub use report::{
    aggregate, emit_report, failure_counts, parse_report, render_report, AggregateRow, ReportFormat,
    CSV_COLUMNS,
};

use crate::baselines::{best_subset, cv_select_lambda, BestSubsetConfig};
use crate::data::{generate_synthetic, parse_formula, Dataset, FormulaSpec, SynthConfig};
use crate::error::{Error, Result};
use crate::linmod::{predict, Criterion, DesignMatrix};
use crate::search::fit_model;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SPLITWISE_THREADS";

#[derive(Debug, Clone)]
pub enum DataSource {
    /// One dataset per seed, generated from `template` with its seed replaced.
    Synthetic { template: SynthConfig, seeds: Vec<u64> },
    Fixed { dataset: Dataset, formula: FormulaSpec },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub criterion: Criterion,
    /// Fraction of rows held out for RMSE/MAE; `None` scores in-sample.
    pub holdout: Option<f64>,
    /// Seed for the holdout split and the run label on fixed data.
    pub seed: u64,
    /// Worker threads; `None` reads [`THREADS_ENV`], then uses all cores.
    pub threads: Option<usize>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            criterion: Criterion::Aic,
            holdout: None,
            seed: 0,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: String,
    pub settings: String,
    pub seed: u64,
    pub aic: Option<f64>,
    pub bic: Option<f64>,
    pub adj_r2: f64,
    pub rmse: f64,
    pub mae: f64,
    pub n_vars: usize,
    /// Original variable names, sorted.
    pub selected_set: Vec<String>,
    pub wall_time_s: f64,
    /// Number of applied search steps, for search-based methods.
    pub history_len: Option<usize>,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    fn failed(spec: &MethodSpec, seed: u64, error: String, wall_time_s: f64) -> Self {
        RunRecord {
            method: spec.id.clone(),
            settings: spec.label.clone(),
            seed,
            aic: None,
            bic: None,
            adj_r2: f64::NAN,
            rmse: f64::NAN,
            mae: f64::NAN,
            n_vars: 0,
            selected_set: Vec::new(),
            wall_time_s,
            history_len: None,
            error: Some(error),
        }
    }
}

/// Worker count from [`THREADS_ENV`] if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
}

struct Outcome {
    aic: Option<f64>,
    bic: Option<f64>,
    adj_r2: f64,
    predictions: Vec<f64>,
    selected: Vec<String>,
    history_len: Option<usize>,
}

fn adjusted_r2(y: &[f64], fitted: &[f64], k_coef: usize) -> f64 {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let rss: f64 = y.iter().zip(fitted).map(|(a, b)| (a - b).powi(2)).sum();
    1.0 - (rss / tss) * (n - 1.0) / (n - k_coef as f64)
}

fn run_method(
    spec: &MethodSpec,
    train: &Dataset,
    eval: &Dataset,
    formula: &FormulaSpec,
    criterion: Criterion,
    seed: u64,
) -> Result<Outcome> {
    match &spec.settings {
        Settings::Search(base) => {
            let config = crate::search::SearchConfig {
                criterion,
                ..base.clone()
            };
            let model = fit_model(train, formula, &config)?;
            model.check_history().map_err(|e| {
                Error::InvalidConfig(format!("search history invariant violated: {e}"))
            })?;
            Ok(Outcome {
                aic: Some(model.fit().aic),
                bic: Some(model.fit().bic),
                adj_r2: model.fit().adj_r2,
                predictions: model.predict(eval)?,
                selected: model.selected_variables(),
                history_len: Some(model.history.len()),
            })
        }
        Settings::BestSubset { min_size, max_size } => {
            let p = formula.resolve(train)?.len();
            let max_size = (*max_size).min(p);
            let config = BestSubsetConfig::new((*min_size).min(max_size), max_size, criterion);
            let result = best_subset(train, formula, &config)?;
            let cols = result
                .selected
                .iter()
                .map(|v| eval.require(v).map(|c| (v.as_str(), c)))
                .collect::<Result<Vec<_>>>()?;
            let design = DesignMatrix::with_intercept(eval.n_rows(), cols)?;
            let mut selected = result.selected.clone();
            selected.sort();
            Ok(Outcome {
                aic: Some(result.fit.aic),
                bic: Some(result.fit.bic),
                adj_r2: result.fit.adj_r2,
                predictions: predict(&result.fit, &design)?,
                selected,
                history_len: None,
            })
        }
        Settings::Penalized(base) => {
            let config = crate::baselines::ElasticNetConfig {
                seed,
                ..base.clone()
            };
            let cv = cv_select_lambda(train, formula, &config)?;
            let y = train.require(&formula.response)?;
            let fitted = cv.fit.predict(train)?;
            let mut selected = cv.fit.selected();
            selected.sort();
            Ok(Outcome {
                aic: None,
                bic: None,
                adj_r2: adjusted_r2(y, &fitted, selected.len() + 1),
                predictions: cv.fit.predict(eval)?,
                selected,
                history_len: None,
            })
        }
    }
}

fn run_one(spec: &MethodSpec, train: &Dataset, eval: &Dataset, formula: &FormulaSpec, criterion: Criterion, seed: u64) -> RunRecord {
    let start = Instant::now();
    let outcome = run_method(spec, train, eval, formula, criterion, seed)
        .and_then(|o| eval.require(&formula.response).map(|y| (o, y.to_vec())));
    let wall_time_s = start.elapsed().as_secs_f64();
    match outcome {
        Ok((o, y)) => {
            let n = y.len() as f64;
            let (sq, abs) = y
                .iter()
                .zip(&o.predictions)
                .fold((0.0, 0.0), |(s, a), (yv, p)| (s + (yv - p).powi(2), a + (yv - p).abs()));
            RunRecord {
                method: spec.id.clone(),
                settings: spec.label.clone(),
                seed,
                aic: o.aic,
                bic: o.bic,
                adj_r2: o.adj_r2,
                rmse: (sq / n).sqrt(),
                mae: abs / n,
                n_vars: o.selected.len(),
                selected_set: o.selected,
                wall_time_s,
                history_len: o.history_len,
                error: None,
            }
        }
        Err(e) => RunRecord::failed(spec, seed, e.to_string(), wall_time_s),
    }
}

/// Training and evaluation rows: a seeded shuffle with the first `fraction` held out.
pub fn holdout_split(dataset: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidConfig(format!("holdout fraction must lie in (0, 1), got {fraction}")));
    }
    let n = dataset.n_rows();
    let n_test = (n as f64 * fraction).round() as usize;
    if n_test == 0 || n_test >= n {
        return Err(Error::InvalidConfig(format!(
            "holdout fraction {fraction} leaves no rows on one side of {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
    let (test, train) = order.split_at(n_test);
    let mut train = train.to_vec();
    let mut test = test.to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((dataset.select_rows(&train)?, dataset.select_rows(&test)?))
}

fn run_dataset(
    methods: &[MethodSpec],
    dataset: &Dataset,
    formula: &FormulaSpec,
    options: &SuiteOptions,
    seed: u64,
) -> Vec<RunRecord> {
    let split = match options.holdout {
        Some(f) => holdout_split(dataset, f, seed).map(Some),
        None => Ok(None),
    };
    match split {
        Ok(Some((train, test))) => methods
            .iter()
            .map(|m| run_one(m, &train, &test, formula, options.criterion, seed))
            .collect(),
        Ok(None) => methods
            .iter()
            .map(|m| run_one(m, dataset, dataset, formula, options.criterion, seed))
            .collect(),
        Err(e) => methods
            .iter()
            .map(|m| RunRecord::failed(m, seed, e.to_string(), 0.0))
            .collect(),
    }
}

/// Runs every method on every dataset. Method failures become failed
/// records; the result is ordered by seed, then by position in `methods`.
pub fn run_suite(methods: &[MethodSpec], source: &DataSource, options: &SuiteOptions) -> Result<Vec<RunRecord>> {
    if methods.is_empty() {
        return Err(Error::InvalidConfig("no methods to run".into()));
    }
    for m in methods {
        m.validate()?;
    }
    if let Some(f) = options.holdout {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::InvalidConfig(format!("holdout fraction must lie in (0, 1), got {f}")));
        }
    }
    let threads = options.threads.or_else(threads_from_env).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;

    let mut records: Vec<RunRecord> = match source {
        DataSource::Synthetic { template, seeds } => {
            template.validate()?;
            let mut distinct = seeds.clone();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() != seeds.len() || seeds.is_empty() {
                return Err(Error::InvalidConfig("seeds must be distinct and non-empty".into()));
            }
            pool.install(|| {
                seeds
                    .par_iter()
                    .map(|&seed| {
                        let config = SynthConfig { seed, ..template.clone() };
                        let generated = generate_synthetic(&config)
                            .and_then(|(d, _)| parse_formula("y ~ .", &d).map(|f| (d, f)));
                        match generated {
                            Ok((data, formula)) => run_dataset(methods, &data, &formula, options, seed),
                            Err(e) => methods
                                .iter()
                                .map(|m| RunRecord::failed(m, seed, e.to_string(), 0.0))
                                .collect(),
                        }
                    })
                    .flatten()
                    .collect()
            })
        }
        DataSource::Fixed { dataset, formula } => {
            formula.resolve(dataset)?;
            pool.install(|| run_dataset(methods, dataset, formula, options, options.seed))
        }
    };
    let position = |id: &str| methods.iter().position(|m| m.id == id).unwrap_or(usize::MAX);
    records.sort_by(|a, b| a.seed.cmp(&b.seed).then(position(&a.method).cmp(&position(&b.method))));
    Ok(records)
}
