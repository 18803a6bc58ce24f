use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::RunRecord;
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 16] = [
    "method",
    "settings",
    "aic_mean",
    "aic_sd",
    "bic_mean",
    "bic_sd",
    "adj_r2_mean",
    "adj_r2_sd",
    "rmse_mean",
    "rmse_sd",
    "mae_mean",
    "mae_sd",
    "stability",
    "vars_mean",
    "vars_sd",
    "time_s",
];

/// Per-method summary over successful runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub method: String,
    pub settings: String,
    pub aic_mean: Option<f64>,
    pub aic_sd: Option<f64>,
    pub bic_mean: Option<f64>,
    pub bic_sd: Option<f64>,
    pub adj_r2_mean: f64,
    pub adj_r2_sd: f64,
    pub rmse_mean: f64,
    pub rmse_sd: f64,
    pub mae_mean: f64,
    pub mae_sd: f64,
    /// Share of runs selecting the most common variable set.
    pub stability: f64,
    pub vars_mean: f64,
    pub vars_sd: f64,
    /// Mean wall time per run; left empty in deterministic reports.
    pub time_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::InvalidConfig(format!("unknown report format {s:?}"))),
        }
    }
}

/// Mean and sample standard deviation, summed in sorted order so the result
/// does not depend on input order.
fn mean_sd(mut values: Vec<f64>) -> (f64, f64) {
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let mut dev: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    dev.sort_by(f64::total_cmp);
    (mean, (dev.iter().sum::<f64>() / (n - 1.0)).sqrt())
}

fn optional_stat(values: Vec<Option<f64>>) -> (Option<f64>, Option<f64>) {
    match values.into_iter().collect::<Option<Vec<f64>>>() {
        Some(v) if !v.is_empty() => {
            let (m, s) = mean_sd(v);
            (Some(m), Some(s))
        }
        _ => (None, None),
    }
}

/// Number of failed runs per method, for methods with any failures.
pub fn failure_counts(records: &[RunRecord]) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for r in records.iter().filter(|r| !r.is_ok()) {
        *out.entry(r.method.clone()).or_insert(0) += 1;
    }
    out
}

/// One row per method, sorted by method identifier. Failed runs are left out.
pub fn aggregate(records: &[RunRecord]) -> Result<Vec<AggregateRow>> {
    let mut groups: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(&r.method).or_default().push(r);
    }
    if groups.is_empty() {
        return Err(Error::NoSuccessfulRuns("no records".into()));
    }
    let mut rows = Vec::with_capacity(groups.len());
    for (method, runs) in groups {
        let ok: Vec<&RunRecord> = runs.into_iter().filter(|r| r.is_ok()).collect();
        if ok.is_empty() {
            return Err(Error::NoSuccessfulRuns(method.to_string()));
        }
        let mut settings: Vec<&str> = ok.iter().map(|r| r.settings.as_str()).collect();
        settings.sort_unstable();
        let collect = |f: fn(&RunRecord) -> f64| ok.iter().map(|r| f(r)).collect::<Vec<f64>>();

        let (aic_mean, aic_sd) = optional_stat(ok.iter().map(|r| r.aic).collect());
        let (bic_mean, bic_sd) = optional_stat(ok.iter().map(|r| r.bic).collect());
        let (adj_r2_mean, adj_r2_sd) = mean_sd(collect(|r| r.adj_r2));
        let (rmse_mean, rmse_sd) = mean_sd(collect(|r| r.rmse));
        let (mae_mean, mae_sd) = mean_sd(collect(|r| r.mae));
        let (vars_mean, vars_sd) = mean_sd(collect(|r| r.n_vars as f64));
        let (time_mean, _) = mean_sd(collect(|r| r.wall_time_s));

        let mut sets: BTreeMap<&[String], usize> = BTreeMap::new();
        for r in &ok {
            *sets.entry(r.selected_set.as_slice()).or_insert(0) += 1;
        }
        let modal = sets.values().copied().max().unwrap_or(0);

        rows.push(AggregateRow {
            method: method.to_string(),
            settings: settings[0].to_string(),
            aic_mean,
            aic_sd,
            bic_mean,
            bic_sd,
            adj_r2_mean,
            adj_r2_sd,
            rmse_mean,
            rmse_sd,
            mae_mean,
            mae_sd,
            stability: modal as f64 / ok.len() as f64,
            vars_mean,
            vars_sd,
            time_s: Some(time_mean),
        });
    }
    Ok(rows)
}

/// Report text in the given format.
pub fn render_report(rows: &[AggregateRow], format: ReportFormat) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::InvalidConfig("report has no rows".into()));
    }
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row).map_err(|e| Error::Csv(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
        }
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(rows).map_err(|e| Error::Csv(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
    }
}

pub fn emit_report(rows: &[AggregateRow], format: ReportFormat, path: &Path) -> Result<()> {
    let text = render_report(rows, format)?;
    fs::write(path, text).map_err(|e| Error::Write {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Reads a report produced by [`render_report`].
pub fn parse_report(text: &str, format: ReportFormat) -> Result<Vec<AggregateRow>> {
    match format {
        ReportFormat::Csv => {
            let mut r = csv::Reader::from_reader(text.as_bytes());
            let header: Vec<String> = r
                .headers()
                .map_err(|e| Error::Csv(e.to_string()))?
                .iter()
                .map(str::to_string)
                .collect();
            if header != CSV_COLUMNS {
                return Err(Error::Csv(format!("unexpected report header {header:?}")));
            }
            r.deserialize()
                .map(|row| row.map_err(|e| Error::Csv(e.to_string())))
                .collect()
        }
        ReportFormat::Json => serde_json::from_str(text).map_err(|e| Error::Csv(e.to_string())),
    }
}
