//! Depth-limited regression-tree splits on a single predictor.
//!
//! Candidate cuts are midpoints between consecutive distinct values of `x`,
//! so a cut never coincides with an observation. Splitting is greedy: the
//! root cut is chosen first, then each child may split once. A split is kept
//! only if its SSE reduction, divided by the root SSE, reaches `cp`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: u8,
    pub cp: f64,
    pub minsplit: usize,
    pub minbucket: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 2,
            cp: 0.01,
            minsplit: 20,
            minbucket: 7,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !matches!(self.max_depth, 1 | 2) {
            return bad(format!("max_depth must be 1 or 2, got {}", self.max_depth));
        }
        if !(self.cp >= 0.0 && self.cp.is_finite()) {
            return bad(format!("cp must be >= 0, got {}", self.cp));
        }
        if self.minbucket < 1 {
            return bad("minbucket must be >= 1".into());
        }
        if self.minsplit < 2 * self.minbucket {
            return bad(format!(
                "minsplit ({}) must be at least 2 * minbucket ({})",
                self.minsplit, self.minbucket
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    /// Strictly increasing, at most two entries.
    pub cuts: Vec<f64>,
    pub sse_root: f64,
    pub sse_after: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleSplit {
    pub cut: f64,
    pub sse_gain: f64,
}

#[derive(Debug, Clone, Copy)]
struct NodeSplit {
    /// Left child is `[..pos]` of the sorted node.
    pos: usize,
    cut: f64,
    gain: f64,
}

/// Sorted copy of the data, ordered by `x` and then by target so that joint
/// row permutations cannot change any floating-point sum.
fn sorted_pairs(x: &[f64], target: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.len() != target.len() {
        return Err(Error::LengthMismatch(x.len(), target.len()));
    }
    if x.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(target[a].total_cmp(&target[b])));
    Ok((
        idx.iter().map(|&i| x[i]).collect(),
        idx.iter().map(|&i| target[i]).collect(),
    ))
}

fn sse(t: &[f64]) -> f64 {
    if t.is_empty() {
        return 0.0;
    }
    let mean = t.iter().sum::<f64>() / t.len() as f64;
    t.iter().map(|v| (v - mean).powi(2)).sum()
}

fn midpoint(a: f64, b: f64) -> Option<f64> {
    let m = a + (b - a) / 2.0;
    (a < m && m < b).then_some(m)
}

/// Best split of one sorted node by SSE, ignoring `cp` and `minsplit`.
fn best_in_node(xs: &[f64], ts: &[f64], minbucket: usize) -> Option<NodeSplit> {
    let n = ts.len();
    if n < 2 * minbucket {
        return None;
    }
    let mean = ts.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = ts.iter().map(|v| v - mean).collect();
    let node_sse: f64 = centered.iter().map(|v| v * v).sum();
    let total: f64 = centered.iter().sum();

    // Children SSE = node_sse - L^2/m_l - R^2/m_r on centered data.
    let mut left = 0.0;
    let mut best: Option<(f64, usize, f64)> = None;
    for pos in 1..n {
        left += centered[pos - 1];
        if pos < minbucket || n - pos < minbucket || xs[pos - 1] == xs[pos] {
            continue;
        }
        let Some(cut) = midpoint(xs[pos - 1], xs[pos]) else {
            continue;
        };
        let right = total - left;
        let explained = left * left / pos as f64 + right * right / (n - pos) as f64;
        if best.is_none_or(|(e, _, _)| explained > e) {
            best = Some((explained, pos, cut));
        }
    }
    let (_, pos, cut) = best?;
    let children = sse(&ts[..pos]) + sse(&ts[pos..]);
    Some(NodeSplit {
        pos,
        cut,
        gain: (node_sse - children).max(0.0),
    })
}

fn passes_cp(gain: f64, sse_root: f64, cp: f64) -> bool {
    gain > 0.0 && sse_root > 0.0 && gain / sse_root >= cp
}

/// Best root split, subject to `minsplit`, `minbucket` and `cp`.
/// Ties go to the smallest cut.
pub fn best_single_split(
    x: &[f64],
    target: &[f64],
    params: &TreeParams,
) -> Result<Option<SingleSplit>> {
    params.validate()?;
    let (xs, ts) = sorted_pairs(x, target)?;
    if xs.len() < params.minsplit {
        return Ok(None);
    }
    let sse_root = sse(&ts);
    Ok(best_in_node(&xs, &ts, params.minbucket)
        .filter(|s| passes_cp(s.gain, sse_root, params.cp))
        .map(|s| SingleSplit {
            cut: s.cut,
            sse_gain: s.gain,
        }))
}

/// Greedy depth-two tree; returns at most two cuts (three segments).
pub fn shallow_tree_cuts(x: &[f64], target: &[f64], params: &TreeParams) -> Result<SplitResult> {
    params.validate()?;
    let (xs, ts) = sorted_pairs(x, target)?;
    let sse_root = sse(&ts);
    let none = SplitResult {
        cuts: Vec::new(),
        sse_root,
        sse_after: sse_root,
    };
    if xs.len() < params.minsplit {
        return Ok(none);
    }
    let Some(root) = best_in_node(&xs, &ts, params.minbucket)
        .filter(|s| passes_cp(s.gain, sse_root, params.cp))
    else {
        return Ok(none);
    };

    let mut cuts = vec![root.cut];
    let mut sse_after = sse(&ts[..root.pos]) + sse(&ts[root.pos..]);
    if params.max_depth >= 2 {
        let child = |lo: usize, hi: usize| {
            if hi - lo < params.minsplit {
                return None;
            }
            best_in_node(&xs[lo..hi], &ts[lo..hi], params.minbucket)
                .filter(|s| passes_cp(s.gain, sse_root, params.cp))
        };
        let left = child(0, root.pos);
        let right = child(root.pos, xs.len());
        let pick = match (left, right) {
            (Some(l), Some(r)) => Some(if r.gain > l.gain { r } else { l }),
            (l, r) => l.or(r),
        };
        if let Some(s) = pick {
            cuts.push(s.cut);
            sse_after -= s.gain;
        }
    }
    cuts.sort_by(f64::total_cmp);
    Ok(SplitResult {
        cuts,
        sse_root,
        sse_after: sse_after.max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn loose() -> TreeParams {
        TreeParams {
            max_depth: 2,
            cp: 0.0,
            minsplit: 2,
            minbucket: 1,
        }
    }

    #[test]
    fn perfect_step() {
        let x: Vec<f64> = (1..=100).map(f64::from).collect();
        let t: Vec<f64> = x.iter().map(|&v| if v > 50.0 { 1.0 } else { 0.0 }).collect();
        let s = best_single_split(&x, &t, &TreeParams::default()).unwrap().unwrap();
        assert_eq!(s.cut, 50.5);
        let r = shallow_tree_cuts(&x, &t, &TreeParams::default()).unwrap();
        assert_eq!(r.cuts, vec![50.5]);
        assert_eq!(r.sse_after, 0.0);
    }

    #[test]
    fn constant_target_has_no_split() {
        let x: Vec<f64> = (0..40).map(f64::from).collect();
        let t = vec![3.0; 40];
        assert!(best_single_split(&x, &t, &TreeParams::default()).unwrap().is_none());
        assert!(shallow_tree_cuts(&x, &t, &TreeParams::default()).unwrap().cuts.is_empty());
    }

    #[test]
    fn three_level_step() {
        let x: Vec<f64> = (0..60).map(|i| f64::from(i) / 2.0).collect();
        let t: Vec<f64> = x
            .iter()
            .map(|&v| if v < 10.0 { 0.0 } else if v < 20.0 { 5.0 } else { -3.0 })
            .collect();
        let params = TreeParams {
            minsplit: 20,
            minbucket: 7,
            ..TreeParams::default()
        };
        let r = shallow_tree_cuts(&x, &t, &params).unwrap();
        assert_eq!(r.cuts, vec![9.75, 19.75]);
        assert!(r.sse_after.abs() < 1e-9);
    }

    #[test]
    fn mtcars_disp_midpoint() {
        // Adjacent distinct displacements 95.1 and 108.0.
        assert_eq!(midpoint(95.1, 108.0), Some(101.55));
    }

    #[test]
    fn size_limits() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let t: Vec<f64> = x.iter().map(|v| v * v).collect();
        // n < minsplit
        assert!(best_single_split(&x, &t, &TreeParams::default()).unwrap().is_none());
        let p = TreeParams { minsplit: 10, minbucket: 5, cp: 0.0, max_depth: 2 };
        let s = best_single_split(&x, &t, &p).unwrap().unwrap();
        assert_eq!(s.cut, 4.5);
    }

    #[test]
    fn errors_and_validation() {
        assert!(matches!(
            best_single_split(&[1.0], &[1.0, 2.0], &loose()),
            Err(Error::LengthMismatch(1, 2))
        ));
        assert!(matches!(shallow_tree_cuts(&[], &[], &loose()), Err(Error::EmptyDataset)));
        let bad = TreeParams { minsplit: 5, minbucket: 3, ..TreeParams::default() };
        assert!(bad.validate().is_err());
        let bad = TreeParams { max_depth: 3, ..TreeParams::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn thirty_two_rows_at_defaults_split_children_only_if_large() {
        // Root split at 16/16 leaves both children below minsplit = 20.
        let x: Vec<f64> = (0..32).map(f64::from).collect();
        let t: Vec<f64> = x.iter().map(|&v| if v < 16.0 { 0.0 } else if v < 24.0 { 2.0 } else { 4.0 } + v * 0.01).collect();
        let r = shallow_tree_cuts(&x, &t, &TreeParams::default()).unwrap();
        assert_eq!(r.cuts.len(), 1);
    }

    proptest! {
        #[test]
        fn invariants(
            pairs in proptest::collection::vec((-50i32..50, -100.0f64..100.0), 2..120),
            scale in 0.1f64..10.0,
            rot in 0usize..120,
        ) {
            let x: Vec<f64> = pairs.iter().map(|p| f64::from(p.0) / 4.0).collect();
            let t: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let params = TreeParams { cp: 0.001, minsplit: 6, minbucket: 3, max_depth: 2 };
            let r = shallow_tree_cuts(&x, &t, &params).unwrap();
            prop_assert!(r.sse_after <= r.sse_root * (1.0 + 1e-12));
            prop_assert!(r.cuts.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(r.cuts.len() <= 2);
            for c in &r.cuts {
                prop_assert!(!x.contains(c));
                prop_assert!(x.iter().any(|v| v < c) && x.iter().any(|v| v > c));
            }

            let k = rot % x.len();
            let mut xr = x.clone();
            let mut tr = t.clone();
            xr.rotate_left(k);
            tr.rotate_left(k);
            prop_assert_eq!(&shallow_tree_cuts(&xr, &tr, &params).unwrap(), &r);

            let ts: Vec<f64> = t.iter().map(|v| v * scale).collect();
            let rs = shallow_tree_cuts(&x, &ts, &params).unwrap();
            prop_assert_eq!(rs.cuts, r.cuts);
        }
    }
}
