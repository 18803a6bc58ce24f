//! Slow, independent reference implementations used to cross-check the
//! library. Nothing here calls into the code under test except for shared
//! plain-data types.
#![allow(dead_code)]

use splitwise::encode::Encoding;
use splitwise::treesplit::TreeParams;
use splitwise::Criterion;

pub const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Least squares with intercept via normal equations on centered columns.
/// Returns (intercept, slopes, rss).
pub fn ols(y: &[f64], cols: &[Vec<f64>]) -> Option<(f64, Vec<f64>, f64)> {
    let n = y.len();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let ym = mean(y);
    let means: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
    let cc: Vec<Vec<f64>> = cols
        .iter()
        .zip(&means)
        .map(|(c, m)| c.iter().map(|v| v - m).collect())
        .collect();
    let yc: Vec<f64> = y.iter().map(|v| v - ym).collect();
    let p = cols.len();
    let gram: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| (0..n).map(|r| cc[i][r] * cc[j][r]).sum()).collect())
        .collect();
    let xty: Vec<f64> = (0..p).map(|i| (0..n).map(|r| cc[i][r] * yc[r]).sum()).collect();
    let beta = if p == 0 { Vec::new() } else { solve(gram, xty)? };
    let intercept = ym - beta.iter().zip(&means).map(|(b, m)| b * m).sum::<f64>();
    let rss = (0..n)
        .map(|r| {
            let fit = intercept + (0..p).map(|j| beta[j] * cols[j][r]).sum::<f64>();
            (y[r] - fit).powi(2)
        })
        .sum();
    Some((intercept, beta, rss))
}

pub fn info_criterion(which: Criterion, n: usize, rss: f64, k_coef: usize) -> f64 {
    let nf = n as f64;
    let loglik = -0.5 * nf * (LN_2PI + (rss / nf).ln() + 1.0);
    let penalty = match which {
        Criterion::Aic => 2.0,
        Criterion::Bic => nf.ln(),
    };
    -2.0 * loglik + penalty * (k_coef as f64 + 1.0)
}

pub fn score(which: Criterion, y: &[f64], cols: &[Vec<f64>]) -> Option<f64> {
    let (_, _, rss) = ols(y, cols)?;
    Some(info_criterion(which, y.len(), rss, cols.len() + 1))
}

fn naive_sse(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m).powi(2)).sum()
}

/// Midpoints between consecutive distinct values, ascending.
pub fn candidate_cuts(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.windows(2)
        .map(|w| w[0] + (w[1] - w[0]) / 2.0)
        .filter(|m| v.iter().all(|val| val != m))
        .collect()
}

/// Exhaustive SSE-minimizing cut of one node; returns (cut, gain).
fn brute_node(x: &[f64], t: &[f64], minbucket: usize) -> Option<(f64, f64)> {
    let node = naive_sse(t);
    let mut best: Option<(f64, f64)> = None;
    for c in candidate_cuts(x) {
        let left: Vec<f64> = x.iter().zip(t).filter(|(xv, _)| **xv < c).map(|(_, tv)| *tv).collect();
        let right: Vec<f64> = x.iter().zip(t).filter(|(xv, _)| **xv >= c).map(|(_, tv)| *tv).collect();
        if left.len() < minbucket || right.len() < minbucket {
            continue;
        }
        let children = naive_sse(&left) + naive_sse(&right);
        if best.is_none_or(|(_, s)| children < s) {
            best = Some((c, children));
        }
    }
    best.map(|(c, s)| (c, (node - s).max(0.0)))
}

fn keeps(gain: f64, root: f64, cp: f64) -> bool {
    gain > 0.0 && root > 0.0 && gain / root >= cp
}

pub fn brute_single_split(x: &[f64], t: &[f64], p: &TreeParams) -> Option<f64> {
    if x.len() < p.minsplit {
        return None;
    }
    let root = naive_sse(t);
    brute_node(x, t, p.minbucket)
        .filter(|&(_, g)| keeps(g, root, p.cp))
        .map(|(c, _)| c)
}

pub fn brute_tree_cuts(x: &[f64], t: &[f64], p: &TreeParams) -> Vec<f64> {
    let Some(c0) = brute_single_split(x, t, p) else {
        return Vec::new();
    };
    let mut cuts = vec![c0];
    if p.max_depth < 2 {
        return cuts;
    }
    let root = naive_sse(t);
    let side = |left: bool| {
        let (xs, ts): (Vec<f64>, Vec<f64>) = x
            .iter()
            .zip(t)
            .filter(|(xv, _)| (**xv < c0) == left)
            .map(|(a, b)| (*a, *b))
            .unzip();
        if xs.len() < p.minsplit {
            return None;
        }
        brute_node(&xs, &ts, p.minbucket).filter(|&(_, g)| keeps(g, root, p.cp))
    };
    let chosen = match (side(true), side(false)) {
        (Some(l), Some(r)) => Some(if r.1 > l.1 { r } else { l }),
        (l, r) => l.or(r),
    };
    if let Some((c, _)) = chosen {
        cuts.push(c);
        cuts.sort_by(f64::total_cmp);
    }
    cuts
}

pub fn encoded(x: &[f64], enc: &Encoding) -> Vec<Vec<f64>> {
    let ind = |b: bool| if b { 1.0 } else { 0.0 };
    match *enc {
        Encoding::Excluded => vec![],
        Encoding::Linear => vec![x.to_vec()],
        Encoding::SingleSplit(c) => vec![x.iter().map(|&v| ind(v >= c)).collect()],
        Encoding::DoubleSplit(lo, hi) => vec![
            x.iter().map(|&v| ind(lo <= v && v < hi)).collect(),
            x.iter().map(|&v| ind(v >= hi)).collect(),
        ],
    }
}

/// Scores all four stand-alone forms and keeps the lowest, simplest first on ties.
pub fn enumerate_univariate(
    x: &[f64],
    y: &[f64],
    which: Criterion,
    p: &TreeParams,
) -> (Encoding, f64) {
    let mut forms = vec![Encoding::Excluded];
    if x.iter().any(|&v| v != x[0]) {
        forms.push(Encoding::Linear);
        if let Some(c) = brute_single_split(x, y, p) {
            forms.push(Encoding::SingleSplit(c));
        }
        if let [lo, hi] = brute_tree_cuts(x, y, p)[..] {
            forms.push(Encoding::DoubleSplit(lo, hi));
        }
    }
    let mut best = (Encoding::Excluded, f64::INFINITY);
    for enc in forms {
        let cols = encoded(x, &enc);
        if cols.iter().any(|c| c.iter().all(|&v| v == c[0])) {
            continue;
        }
        if let Some(s) = score(which, y, &cols) {
            if s < best.1 {
                best = (enc, s);
            }
        }
    }
    best
}

/// Best subset by enumerating from the largest index downwards; ties go to the
/// lexicographically smallest index list.
pub fn brute_best_subset(
    y: &[f64],
    xs: &[Vec<f64>],
    min_size: usize,
    max_size: usize,
    which: Criterion,
) -> (Vec<usize>, f64) {
    let p = xs.len();
    let mut best: Option<(Vec<usize>, f64)> = None;
    for mask in (0u64..(1u64 << p)).rev() {
        let idx: Vec<usize> = (0..p).filter(|j| mask >> j & 1 == 1).collect();
        if idx.len() < min_size || idx.len() > max_size {
            continue;
        }
        let cols: Vec<Vec<f64>> = idx.iter().map(|&j| xs[j].clone()).collect();
        let Some(s) = score(which, y, &cols) else { continue };
        let better = match &best {
            None => true,
            Some((bi, bs)) => s < *bs || (s == *bs && idx < *bi),
        };
        if better {
            best = Some((idx, s));
        }
    }
    best.expect("at least one estimable subset")
}

/// Predictors standardized with the population standard deviation, response centered.
pub struct Standardized {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

pub fn standardize(xs: &[Vec<f64>], y: &[f64]) -> Standardized {
    let n = y.len() as f64;
    let ym = y.iter().sum::<f64>() / n;
    let x = xs
        .iter()
        .map(|c| {
            let m = c.iter().sum::<f64>() / n;
            let sd = (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
            c.iter().map(|v| (v - m) / sd).collect()
        })
        .collect();
    Standardized {
        x,
        y: y.iter().map(|v| v - ym).collect(),
    }
}

pub fn lambda_max(s: &Standardized) -> f64 {
    let n = s.y.len() as f64;
    s.x.iter()
        .map(|c| c.iter().zip(&s.y).map(|(a, b)| a * b).sum::<f64>().abs() / n)
        .fold(0.0, f64::max)
}

/// `(X'X + n lambda I)^{-1} X'y` on standardized data.
pub fn ridge_closed_form(s: &Standardized, lambda: f64) -> Vec<f64> {
    let p = s.x.len();
    let n = s.y.len();
    let a: Vec<Vec<f64>> = (0..p)
        .map(|i| {
            (0..p)
                .map(|j| {
                    let g: f64 = (0..n).map(|r| s.x[i][r] * s.x[j][r]).sum();
                    g + if i == j { n as f64 * lambda } else { 0.0 }
                })
                .collect()
        })
        .collect();
    let b: Vec<f64> = (0..p).map(|i| (0..n).map(|r| s.x[i][r] * s.y[r]).sum()).collect();
    solve(a, b).expect("ridge system is positive definite")
}

/// Largest violation of the elastic-net optimality conditions.
pub fn kkt_violation(s: &Standardized, beta: &[f64], alpha: f64, lambda: f64) -> f64 {
    let n = s.y.len();
    let r: Vec<f64> = (0..n)
        .map(|i| s.y[i] - (0..beta.len()).map(|j| s.x[j][i] * beta[j]).sum::<f64>())
        .collect();
    let mut worst: f64 = 0.0;
    for (j, &b) in beta.iter().enumerate() {
        let g = s.x[j].iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() / n as f64 - lambda * (1.0 - alpha) * b;
        let v = if b == 0.0 {
            (g.abs() - lambda * alpha).max(0.0)
        } else {
            (g - lambda * alpha * b.signum()).abs()
        };
        worst = worst.max(v);
    }
    worst
}

/// Random split-finder instance: mixes continuous and heavily tied `x`,
/// sizes up to 200 and a spread of tree parameters.
pub fn split_instance(seed: u64) -> (Vec<f64>, Vec<f64>, TreeParams) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=200usize);
    let tied = rng.random_bool(0.4);
    let levels = rng.random_range(2..=12u32);
    let x: Vec<f64> = (0..n)
        .map(|_| {
            if tied {
                f64::from(rng.random_range(0..levels)) * 0.5
            } else {
                rng.sample::<f64, _>(rand_distr::StandardNormal) * 3.0
            }
        })
        .collect();
    let step = rng.random_range(-2.0..2.0);
    let t: Vec<f64> = x
        .iter()
        .map(|&v| step * f64::from(u8::from(v > 0.7)) + rng.sample::<f64, _>(rand_distr::StandardNormal))
        .collect();
    let minbucket = rng.random_range(1..=10usize);
    let params = TreeParams {
        max_depth: rng.random_range(1..=2u8),
        cp: [0.0, 0.001, 0.01, 0.05][rng.random_range(0..4usize)],
        minbucket,
        minsplit: 2 * minbucket + rng.random_range(0..=15usize),
    };
    (x, t, params)
}

/// Seeded synthetic predictor and response for the univariate-form check.
pub fn univariate_instance(seed: u64) -> (Vec<f64>, Vec<f64>) {
    let threshold = seed % 2 == 0;
    let cfg = splitwise::SynthConfig::with_defaults(300, 5, threshold, 1000 + seed);
    let (data, _) = splitwise::data::generate_synthetic(&cfg).unwrap();
    let name = format!("x{}", seed % 5 + 1);
    (data.column(&name).unwrap().to_vec(), data.column("y").unwrap().to_vec())
}

/// Gaussian predictors with distinct scales; every third one carries signal.
pub fn random_dataset(seed: u64, n: usize, p: usize, noise: f64) -> splitwise::Dataset {
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    let xs: Vec<Vec<f64>> = (0..p)
        .map(|j| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal) * (1.0 + j as f64) + j as f64).collect())
        .collect();
    let beta: Vec<f64> = (0..p).map(|j| if j % 3 == 0 { 1.5 / (1.0 + j as f64) } else { 0.0 }).collect();
    let y: Vec<f64> = (0..n)
        .map(|i| 2.0 + (0..p).map(|j| beta[j] * xs[j][i]).sum::<f64>() + noise * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let mut pairs = vec![("y".to_string(), y)];
    pairs.extend(xs.into_iter().enumerate().map(|(j, c)| (format!("x{}", j + 1), c)));
    splitwise::Dataset::from_pairs(pairs).unwrap()
}

pub fn standardized(ds: &splitwise::Dataset) -> Standardized {
    let xs: Vec<Vec<f64>> = ds.column_names()[1..].iter().map(|n| ds.column(n).unwrap().to_vec()).collect();
    standardize(&xs, ds.column("y").unwrap())
}
