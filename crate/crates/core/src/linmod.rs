//! Ordinary least squares and the information criteria every search scores against.

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize, Serializer};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use crate::error::{Error, Result};

pub const INTERCEPT: &str = "(Intercept)";

/// Relative threshold on the R diagonal below which a column is treated as dependent.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    #[default]
    Aic,
    Bic,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Aic => "AIC",
            Criterion::Bic => "BIC",
        })
    }
}

impl FromStr for Criterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aic" => Ok(Criterion::Aic),
            "bic" => Ok(Criterion::Bic),
            _ => Err(Error::InvalidConfig(format!("unknown criterion {s:?}"))),
        }
    }
}

/// Design matrix whose first column is the intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    column_names: Vec<String>,
    values: DMatrix<f64>,
}

impl DesignMatrix {
    /// Intercept column followed by `columns` in order.
    pub fn with_intercept<'a, I>(n: usize, columns: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a [f64])>,
    {
        let mut names = vec![INTERCEPT.to_string()];
        let mut data: Vec<f64> = vec![1.0; n];
        for (name, col) in columns {
            if col.len() != n {
                return Err(Error::LengthMismatch(col.len(), n));
            }
            names.push(name.to_string());
            data.extend_from_slice(col);
        }
        let k = names.len();
        Ok(DesignMatrix {
            column_names: names,
            values: DMatrix::from_vec(n, k, data),
        })
    }

    pub fn new(column_names: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        if column_names.len() != values.ncols() || column_names.is_empty() {
            return Err(Error::InvalidConfig(
                "design needs one name per column and at least the intercept".into(),
            ));
        }
        if column_names[0] != INTERCEPT || values.column(0).iter().any(|&v| v != 1.0) {
            return Err(Error::InvalidConfig(
                "first design column must be an all-ones intercept".into(),
            ));
        }
        Ok(DesignMatrix {
            column_names,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }
}

/// A least-squares fit with the usual diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub column_names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    pub tss: f64,
    pub n: usize,
    pub k_coef: usize,
    pub df_resid: usize,
    pub r2: f64,
    pub adj_r2: f64,
    pub sigma: f64,
    /// Overall F statistic; absent for the intercept-only model.
    pub f_stat: Option<f64>,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    /// Residuals vanish to machine precision; the log-likelihood is unbounded.
    pub saturated: bool,
}

/// Gaussian log-likelihood at the ML variance estimate `rss / n`.
pub fn gaussian_loglik(n: usize, rss: f64) -> f64 {
    let n = n as f64;
    -0.5 * n * ((2.0 * std::f64::consts::PI).ln() + (rss / n).ln() + 1.0)
}

/// AIC/BIC counting `k_coef` coefficients plus the residual variance.
pub fn information_criterion(which: Criterion, n: usize, rss: f64, k_coef: usize) -> f64 {
    let params = (k_coef + 1) as f64;
    let penalty = match which {
        Criterion::Aic => 2.0,
        Criterion::Bic => (n as f64).ln(),
    };
    -2.0 * gaussian_loglik(n, rss) + penalty * params
}

/// The RSS-only form `n ln(rss/n) + 2 k` used by classic step routines.
/// Differs from AIC by a constant in `n`, so it ranks models identically.
#[cfg(test)]
fn rss_criterion(n: usize, rss: f64, k_coef: usize) -> f64 {
    let nf = n as f64;
    nf * (rss / nf).ln() + 2.0 * k_coef as f64
}

pub fn fit_ols(design: &DesignMatrix, y: &[f64]) -> Result<OlsFit> {
    let x = &design.values;
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(Error::LengthMismatch(y.len(), n));
    }
    if n <= k {
        return Err(Error::InsufficientData { n, k });
    }

    let qr = x.clone().qr();
    let r = qr.r();
    let max_diag = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(j) = (0..k).find(|&j| r[(j, j)].abs() < RANK_TOLERANCE * max_diag || max_diag == 0.0)
    {
        return Err(Error::RankDeficient {
            column: design.column_names[j].clone(),
        });
    }

    let mut qty = DVector::from_column_slice(y);
    qr.q_tr_mul(&mut qty);
    let beta = r
        .solve_upper_triangular(&qty.rows(0, k).into_owned())
        .ok_or_else(|| Error::RankDeficient {
            column: design.column_names[k - 1].clone(),
        })?;

    let fitted = x * &beta;
    let residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean_y).powi(2)).sum();
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let saturated = rss <= n as f64 * (1e3 * f64::EPSILON * scale).powi(2);

    let df_resid = n - k;
    let r2 = if tss > 0.0 { 1.0 - rss / tss } else { 0.0 };
    let adj_r2 = 1.0 - (1.0 - r2) * (n - 1) as f64 / df_resid as f64;
    let sigma = (rss / df_resid as f64).sqrt();
    let f_stat = (k > 1).then(|| ((tss - rss) / (k - 1) as f64) / (rss / df_resid as f64));

    // se_j = sigma * ||row j of R^-1||
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .unwrap_or_else(|| DMatrix::from_element(k, k, f64::NAN));
    let std_errors = (0..k).map(|j| sigma * r_inv.row(j).norm()).collect();

    let loglik = gaussian_loglik(n, rss);
    Ok(OlsFit {
        column_names: design.column_names.clone(),
        coefficients: beta.iter().copied().collect(),
        std_errors,
        residuals,
        rss,
        tss,
        n,
        k_coef: k,
        df_resid,
        r2,
        adj_r2,
        sigma,
        f_stat,
        loglik,
        aic: information_criterion(Criterion::Aic, n, rss, k),
        bic: information_criterion(Criterion::Bic, n, rss, k),
        saturated,
    })
}

pub fn criterion(fit: &OlsFit, which: Criterion) -> Result<f64> {
    if fit.saturated {
        return Err(Error::SaturatedFit);
    }
    Ok(match which {
        Criterion::Aic => fit.aic,
        Criterion::Bic => fit.bic,
    })
}

pub fn predict(fit: &OlsFit, design: &DesignMatrix) -> Result<Vec<f64>> {
    if design.column_names != fit.column_names {
        return Err(Error::ColumnMismatch(format!(
            "expected {:?}, got {:?}",
            fit.column_names, design.column_names
        )));
    }
    let beta = DVector::from_column_slice(&fit.coefficients);
    Ok((design.values() * beta).iter().copied().collect())
}

impl OlsFit {
    pub fn t_values(&self) -> Vec<f64> {
        self.coefficients
            .iter()
            .zip(&self.std_errors)
            .map(|(b, se)| b / se)
            .collect()
    }

    /// Two-sided p-values of the coefficient t statistics.
    pub fn p_values(&self) -> Vec<f64> {
        let Ok(t) = StudentsT::new(0.0, 1.0, self.df_resid as f64) else {
            return vec![f64::NAN; self.k_coef];
        };
        self.t_values()
            .into_iter()
            .map(|tv| {
                if tv.is_finite() {
                    2.0 * t.sf(tv.abs())
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn f_pvalue(&self) -> Option<f64> {
        let f = self.f_stat?;
        let dist = FisherSnedecor::new((self.k_coef - 1) as f64, self.df_resid as f64).ok()?;
        Some(dist.sf(f))
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.column_names
            .iter()
            .position(|c| c == name)
            .map(|i| self.coefficients[i])
    }

    /// Min, quartiles (R type 7) and max of the residuals.
    pub fn residual_quantiles(&self) -> [f64; 5] {
        let mut r = self.residuals.clone();
        r.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = (r.len() - 1) as f64 * p;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            r[lo] + (h - lo as f64) * (r[hi] - r[lo])
        };
        [r[0], q(0.25), q(0.5), q(0.75), r[r.len() - 1]]
    }
}

#[derive(Serialize)]
struct CoefficientReport {
    estimate: f64,
    std_error: f64,
    t_value: f64,
    p_value: f64,
}

#[derive(Serialize)]
struct OlsReport<'a> {
    coefficients: IndexMap<&'a str, CoefficientReport>,
    n: usize,
    k_coef: usize,
    df_resid: usize,
    rss: f64,
    r2: f64,
    adj_r2: f64,
    sigma: f64,
    f_stat: Option<f64>,
    f_pvalue: Option<f64>,
    loglik: f64,
    aic: f64,
    bic: f64,
}

impl Serialize for OlsFit {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let p = self.p_values();
        let t = self.t_values();
        let coefficients = self
            .column_names
            .iter()
            .enumerate()
            .map(|(i, name)| {
                (
                    name.as_str(),
                    CoefficientReport {
                        estimate: self.coefficients[i],
                        std_error: self.std_errors[i],
                        t_value: t[i],
                        p_value: p[i],
                    },
                )
            })
            .collect();
        OlsReport {
            coefficients,
            n: self.n,
            k_coef: self.k_coef,
            df_resid: self.df_resid,
            rss: self.rss,
            r2: self.r2,
            adj_r2: self.adj_r2,
            sigma: self.sigma,
            f_stat: self.f_stat,
            f_pvalue: self.f_pvalue(),
            loglik: self.loglik,
            aic: self.aic,
            bic: self.bic,
        }
        .serialize(serializer)
    }
}
