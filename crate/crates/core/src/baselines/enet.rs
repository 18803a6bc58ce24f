use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::design_columns;
use crate::data::{Dataset, FormulaSpec};
use crate::error::{Error, Result};
use crate::linmod::INTERCEPT;

/// Standardized coefficients at or below this magnitude count as unselected.
pub const ACTIVE_THRESHOLD: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Solver {
    /// Convergence when the largest coefficient change in a sweep falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for Solver {
    fn default() -> Self {
        Solver {
            tol: 1e-9,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaGrid {
    Auto { n_lambda: usize },
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticNetConfig {
    /// 0 is ridge, 1 is lasso.
    pub alpha: f64,
    pub lambda_grid: LambdaGrid,
    pub n_folds: usize,
    pub solver: Solver,
    pub seed: u64,
}

impl Default for ElasticNetConfig {
    fn default() -> Self {
        ElasticNetConfig {
            alpha: 1.0,
            lambda_grid: LambdaGrid::Auto { n_lambda: 100 },
            n_folds: 10,
            solver: Solver::default(),
            seed: 0,
        }
    }
}

impl ElasticNetConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        ElasticNetConfig {
            alpha,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        validate_alpha(self.alpha)?;
        if self.n_folds < 2 {
            return bad("n_folds must be at least 2");
        }
        if !(self.solver.tol > 0.0) || self.solver.max_iter == 0 {
            return bad("solver needs tol > 0 and max_iter >= 1");
        }
        match &self.lambda_grid {
            LambdaGrid::Auto { n_lambda } if *n_lambda < 2 => bad("auto grid needs at least 2 values"),
            LambdaGrid::Explicit(g) if g.is_empty() => bad("lambda grid is empty"),
            LambdaGrid::Explicit(g)
                if g.iter().any(|l| !(*l > 0.0 && l.is_finite())) || g.windows(2).any(|w| w[1] >= w[0]) =>
            {
                bad("lambda grid must be positive and strictly descending")
            }
            _ => Ok(()),
        }
    }
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("alpha must lie in [0, 1], got {alpha}")))
    }
}

/// Predictors centered and scaled to unit population variance; response centered.
struct Standardized {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    x_mean: Vec<f64>,
    x_sd: Vec<f64>,
    y_mean: f64,
    /// Mean of each squared standardized column (1, or 0 for a constant column).
    xx: Vec<f64>,
}

impl Standardized {
    fn new(cols: &[Vec<f64>], y: &[f64]) -> Self {
        let n = y.len() as f64;
        let y_mean = y.iter().sum::<f64>() / n;
        let mut x = Vec::with_capacity(cols.len());
        let mut x_mean = Vec::with_capacity(cols.len());
        let mut x_sd = Vec::with_capacity(cols.len());
        let mut xx = Vec::with_capacity(cols.len());
        for c in cols {
            let m = c.iter().sum::<f64>() / n;
            let sd = (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
            let col: Vec<f64> = if sd > 0.0 {
                c.iter().map(|v| (v - m) / sd).collect()
            } else {
                vec![0.0; c.len()]
            };
            xx.push(col.iter().map(|v| v * v).sum::<f64>() / n);
            x.push(col);
            x_mean.push(m);
            x_sd.push(sd);
        }
        Standardized {
            x,
            y: y.iter().map(|v| v - y_mean).collect(),
            x_mean,
            x_sd,
            y_mean,
            xx,
        }
    }

    fn n(&self) -> usize {
        self.y.len()
    }

    fn lambda_max(&self, alpha: f64) -> f64 {
        let n = self.n() as f64;
        let top = self
            .x
            .iter()
            .map(|c| dot(c, &self.y).abs() / n)
            .fold(0.0, f64::max);
        top / alpha.max(1e-3)
    }

    /// Cyclic coordinate descent from `beta`, updated in place.
    fn descend(&self, alpha: f64, lambda: f64, solver: &Solver, beta: &mut [f64]) -> Result<usize> {
        let n = self.n() as f64;
        let mut r: Vec<f64> = self.y.clone();
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                axpy(-b, &self.x[j], &mut r);
            }
        }
        let l1 = lambda * alpha;
        let l2 = lambda * (1.0 - alpha);
        let mut last_change = f64::INFINITY;
        for iter in 1..=solver.max_iter {
            let mut max_change: f64 = 0.0;
            for j in 0..beta.len() {
                if self.xx[j] == 0.0 {
                    continue;
                }
                let old = beta[j];
                let z = dot(&self.x[j], &r) / n + self.xx[j] * old;
                let new = soft_threshold(z, l1) / (self.xx[j] + l2);
                if new != old {
                    axpy(old - new, &self.x[j], &mut r);
                    max_change = max_change.max((new - old).abs());
                    beta[j] = new;
                }
            }
            last_change = max_change;
            if max_change < solver.tol {
                return Ok(iter);
            }
        }
        Err(Error::NotConverged {
            iterations: solver.max_iter,
            last_change,
            last_iterate: beta.to_vec(),
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticNetFit {
    pub names: Vec<String>,
    pub alpha: f64,
    pub lambda: f64,
    pub intercept: f64,
    /// Slopes on the original predictor scale.
    pub coefficients: Vec<f64>,
    /// Slopes on the standardized scale the penalty acts on.
    pub std_coefficients: Vec<f64>,
    pub iterations: usize,
}

impl ElasticNetFit {
    fn from_standardized(names: Vec<String>, s: &Standardized, alpha: f64, lambda: f64, beta: Vec<f64>, iterations: usize) -> Self {
        let coefficients: Vec<f64> = beta
            .iter()
            .zip(&s.x_sd)
            .map(|(b, sd)| if *sd > 0.0 { b / sd } else { 0.0 })
            .collect();
        let intercept = s.y_mean - coefficients.iter().zip(&s.x_mean).map(|(b, m)| b * m).sum::<f64>();
        ElasticNetFit {
            names,
            alpha,
            lambda,
            intercept,
            coefficients,
            std_coefficients: beta,
            iterations,
        }
    }

    /// Intercept first, then every slope.
    pub fn coefficient_map(&self) -> IndexMap<String, f64> {
        std::iter::once((INTERCEPT.to_string(), self.intercept))
            .chain(self.names.iter().cloned().zip(self.coefficients.iter().copied()))
            .collect()
    }

    /// Terms whose standardized coefficient exceeds [`ACTIVE_THRESHOLD`].
    pub fn selected(&self) -> Vec<String> {
        self.names
            .iter()
            .zip(&self.std_coefficients)
            .filter(|(_, b)| b.abs() > ACTIVE_THRESHOLD)
            .map(|(n, _)| n.clone())
            .collect()
    }

    pub fn n_vars(&self) -> usize {
        self.selected().len()
    }

    pub fn predict_columns(&self, cols: &[&[f64]]) -> Result<Vec<f64>> {
        if cols.len() != self.coefficients.len() {
            return Err(Error::LengthMismatch(cols.len(), self.coefficients.len()));
        }
        let n = cols.first().map_or(0, |c| c.len());
        let mut out = vec![self.intercept; n];
        for (c, b) in cols.iter().zip(&self.coefficients) {
            if c.len() != n {
                return Err(Error::LengthMismatch(c.len(), n));
            }
            axpy(*b, c, &mut out);
        }
        Ok(out)
    }

    pub fn predict(&self, dataset: &Dataset) -> Result<Vec<f64>> {
        let cols = self
            .names
            .iter()
            .map(|name| dataset.require(name))
            .collect::<Result<Vec<_>>>()?;
        if cols.is_empty() {
            return Ok(vec![self.intercept; dataset.n_rows()]);
        }
        self.predict_columns(&cols)
    }
}

fn owned_columns(cols: &[&[f64]], rows: Option<&[usize]>) -> Vec<Vec<f64>> {
    cols.iter()
        .map(|c| match rows {
            Some(r) => r.iter().map(|&i| c[i]).collect(),
            None => c.to_vec(),
        })
        .collect()
}

/// Minimizes `(1/2n)|y - b0 - X b|^2 + lambda [alpha |b|_1 + (1 - alpha)/2 |b|^2]`
/// with predictors standardized and the intercept unpenalized.
pub fn elastic_net_fit(
    dataset: &Dataset,
    formula: &FormulaSpec,
    alpha: f64,
    lambda: f64,
    solver: &Solver,
) -> Result<ElasticNetFit> {
    validate_alpha(alpha)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!("lambda must be >= 0, got {lambda}")));
    }
    let (names, cols, y) = design_columns(dataset, formula)?;
    let s = Standardized::new(&owned_columns(&cols, None), y);
    let mut beta = vec![0.0; names.len()];
    let iterations = s.descend(alpha, lambda, solver, &mut beta)?;
    Ok(ElasticNetFit::from_standardized(names, &s, alpha, lambda, beta, iterations))
}

/// Smallest penalty at which every slope is zero; for `alpha` below 0.001 the
/// value for 0.001 is used.
pub fn lambda_max(dataset: &Dataset, formula: &FormulaSpec, alpha: f64) -> Result<f64> {
    let (_, cols, y) = design_columns(dataset, formula)?;
    Ok(Standardized::new(&owned_columns(&cols, None), y).lambda_max(alpha))
}

/// `n_lambda` log-spaced values from `lmax` down to 0.001 * `lmax`
/// (0.0001 * `lmax` when `n > p`).
pub fn lambda_grid(lmax: f64, n_lambda: usize, n: usize, p: usize) -> Vec<f64> {
    let ratio: f64 = if n > p { 1e-4 } else { 1e-3 };
    let top = if lmax > 0.0 { lmax } else { 1e-6 };
    (0..n_lambda)
        .map(|k| top * ratio.powf(k as f64 / (n_lambda - 1) as f64))
        .collect()
}

/// Fold index per row: a seeded shuffle dealt round-robin, so fold sizes differ by at most one.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 || n < k {
        return Err(Error::InvalidConfig(format!("cannot split {n} rows into {k} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
    let mut folds = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        folds[row] = pos % k;
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvPoint {
    pub lambda: f64,
    pub mean_mse: f64,
    /// Standard error of the fold MSEs.
    pub se_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub lambda: f64,
    pub lambda_index: usize,
    pub fit: ElasticNetFit,
    pub curve: Vec<CvPoint>,
    pub folds: Vec<usize>,
}

/// Fits along `grid` with warm starts and returns the standardized slopes at each value.
fn path(s: &Standardized, alpha: f64, grid: &[f64], solver: &Solver) -> Result<Vec<(Vec<f64>, usize)>> {
    let mut beta = vec![0.0; s.x.len()];
    grid.iter()
        .map(|&lambda| {
            let iters = s.descend(alpha, lambda, solver, &mut beta)?;
            Ok((beta.clone(), iters))
        })
        .collect()
}

/// K-fold cross-validation over the penalty grid with seeded folds, then a
/// refit on all rows at the penalty with the lowest mean validation MSE.
pub fn cv_select_lambda(dataset: &Dataset, formula: &FormulaSpec, config: &ElasticNetConfig) -> Result<CvResult> {
    config.validate()?;
    let folds = fold_assignment(dataset.n_rows(), config.n_folds, config.seed)?;
    cv_select_lambda_with_folds(dataset, formula, config, &folds)
}

/// As [`cv_select_lambda`], with caller-supplied fold labels in `0..n_folds`.
pub fn cv_select_lambda_with_folds(
    dataset: &Dataset,
    formula: &FormulaSpec,
    config: &ElasticNetConfig,
    folds: &[usize],
) -> Result<CvResult> {
    config.validate()?;
    let (names, cols, y) = design_columns(dataset, formula)?;
    let n = y.len();
    let k = config.n_folds;
    if folds.len() != n {
        return Err(Error::LengthMismatch(folds.len(), n));
    }
    let mut sizes = vec![0usize; k];
    for &f in folds {
        if f >= k {
            return Err(Error::InvalidConfig(format!("fold label {f} out of range for {k} folds")));
        }
        sizes[f] += 1;
    }
    if sizes.iter().any(|&s| s == 0 || s == n) {
        return Err(Error::InvalidConfig("every fold needs validation and training rows".into()));
    }

    let full = Standardized::new(&owned_columns(&cols, None), y);
    let grid = match &config.lambda_grid {
        LambdaGrid::Auto { n_lambda } => lambda_grid(full.lambda_max(config.alpha), *n_lambda, n, names.len()),
        LambdaGrid::Explicit(g) => g.clone(),
    };

    let fold_mse: Vec<Vec<f64>> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let train: Vec<usize> = (0..n).filter(|&i| folds[i] != fold).collect();
            let test: Vec<usize> = (0..n).filter(|&i| folds[i] == fold).collect();
            let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let s = Standardized::new(&owned_columns(&cols, Some(&train)), &y_train);
            let betas = path(&s, config.alpha, &grid, &config.solver)?;
            Ok(betas
                .into_iter()
                .map(|(beta, _)| {
                    let fit = ElasticNetFit::from_standardized(names.clone(), &s, config.alpha, 0.0, beta, 0);
                    test.iter()
                        .map(|&i| {
                            let pred = fit.intercept
                                + fit.coefficients.iter().zip(&cols).map(|(b, c)| b * c[i]).sum::<f64>();
                            (y[i] - pred).powi(2)
                        })
                        .sum::<f64>()
                        / test.len() as f64
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let kf = k as f64;
    let curve: Vec<CvPoint> = grid
        .iter()
        .enumerate()
        .map(|(g, &lambda)| {
            let vals: Vec<f64> = fold_mse.iter().map(|m| m[g]).collect();
            let mean = vals.iter().sum::<f64>() / kf;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (kf - 1.0);
            CvPoint {
                lambda,
                mean_mse: mean,
                se_mse: (var / kf).sqrt(),
            }
        })
        .collect();
    let mut best = 0;
    for (g, point) in curve.iter().enumerate() {
        if point.mean_mse < curve[best].mean_mse {
            best = g;
        }
    }

    let refit = path(&full, config.alpha, &grid[..=best], &config.solver)?;
    let (beta, iters) = refit.into_iter().next_back().expect("non-empty path");
    Ok(CvResult {
        lambda: grid[best],
        lambda_index: best,
        fit: ElasticNetFit::from_standardized(names, &full, config.alpha, grid[best], beta, iters),
        curve,
        folds: folds.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn random_problem(seed: u64, n: usize, p: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let cols: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let y = (0..n)
            .map(|i| cols[0][i] * 2.0 - cols[1][i] + rng.sample::<f64, _>(StandardNormal))
            .collect();
        (cols, y)
    }

    fn objective(s: &Standardized, beta: &[f64], alpha: f64, lambda: f64) -> f64 {
        let n = s.n() as f64;
        let mut r = s.y.clone();
        for (j, b) in beta.iter().enumerate() {
            axpy(-b, &s.x[j], &mut r);
        }
        let l1: f64 = beta.iter().map(|b| b.abs()).sum();
        let l2: f64 = beta.iter().map(|b| b * b).sum();
        dot(&r, &r) / (2.0 * n) + lambda * (alpha * l1 + (1.0 - alpha) / 2.0 * l2)
    }

    #[test]
    fn objective_never_increases_across_sweeps() {
        let (cols, y) = random_problem(3, 80, 6);
        let s = Standardized::new(&cols, &y);
        for alpha in [0.0, 0.5, 1.0] {
            let mut beta = vec![0.0; 6];
            let mut prev = objective(&s, &beta, alpha, 0.05);
            let one = Solver { tol: f64::MIN_POSITIVE, max_iter: 1 };
            for _ in 0..30 {
                let _ = s.descend(alpha, 0.05, &one, &mut beta);
                let now = objective(&s, &beta, alpha, 0.05);
                assert!(now <= prev + 1e-12, "{now} > {prev}");
                prev = now;
            }
        }
    }

    #[test]
    fn non_convergence_carries_last_iterate() {
        let (cols, y) = random_problem(1, 50, 4);
        let s = Standardized::new(&cols, &y);
        let mut beta = vec![0.0; 4];
        let err = s
            .descend(0.5, 0.01, &Solver { tol: 1e-300, max_iter: 2 }, &mut beta)
            .unwrap_err();
        match err {
            Error::NotConverged { iterations, last_iterate, .. } => {
                assert_eq!(iterations, 2);
                assert_eq!(last_iterate, beta);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_column_stays_zero() {
        let (mut cols, y) = random_problem(2, 40, 3);
        cols[2] = vec![1.5; 40];
        let s = Standardized::new(&cols, &y);
        let mut beta = vec![0.0; 3];
        s.descend(1.0, 0.01, &Solver::default(), &mut beta).unwrap();
        assert_eq!(beta[2], 0.0);
    }

    #[test]
    fn folds_are_balanced_and_seeded() {
        let f = fold_assignment(23, 5, 7).unwrap();
        let mut sizes = [0; 5];
        for &x in &f {
            sizes[x] += 1;
        }
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        assert_eq!(f, fold_assignment(23, 5, 7).unwrap());
        assert_ne!(f, fold_assignment(23, 5, 8).unwrap());
        assert!(fold_assignment(3, 5, 0).is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = lambda_grid(2.0, 100, 50, 10);
        assert_eq!(g.len(), 100);
        assert_eq!(g[0], 2.0);
        assert!((g[99] - 2e-4).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
        let g = lambda_grid(2.0, 100, 10, 50);
        assert!((g[99] - 2e-3).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(ElasticNetConfig::default().validate().is_ok());
        assert!(ElasticNetConfig::with_alpha(1.5).validate().is_err());
        let mut c = ElasticNetConfig::default();
        c.lambda_grid = LambdaGrid::Explicit(vec![1.0, 1.0]);
        assert!(c.validate().is_err());
        c.lambda_grid = LambdaGrid::Explicit(vec![1.0, 0.5]);
        assert!(c.validate().is_ok());
        c.n_folds = 1;
        assert!(c.validate().is_err());
    }
}
