use std::time::Instant;

use indexmap::IndexMap;

use super::engine::{initial_plan, Workspace};
use super::{require_mode, Mode, SearchConfig, SplitwiseModel};
use crate::data::{Dataset, FormulaSpec};
use crate::encode::{apply_encoding, Encoding, TransformPlan};
use crate::error::{Error, Result};
use crate::linmod::{criterion, fit_ols, Criterion, DesignMatrix};
use crate::treesplit::{best_single_split, shallow_tree_cuts, TreeParams};

/// Scored stand-alone forms of one predictor, simplest first.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Candidates(pub Vec<(Encoding, f64)>);

impl Candidates {
    pub fn best_scored(&self) -> (Encoding, f64) {
        let mut best = self.0[0];
        for &(enc, score) in &self.0[1..] {
            if score < best.1 {
                best = (enc, score);
            }
        }
        best
    }

    pub fn best(&self) -> Encoding {
        self.best_scored().0
    }
}

fn score_columns(y: &[f64], cols: &[(String, Vec<f64>)], which: Criterion) -> Option<f64> {
    let design = DesignMatrix::with_intercept(
        y.len(),
        cols.iter().map(|(n, c)| (n.as_str(), c.as_slice())),
    )
    .ok()?;
    let fit = fit_ols(&design, y).ok()?;
    Some(criterion(&fit, which).unwrap_or(f64::NEG_INFINITY))
}

pub(crate) fn univariate_candidates(
    x: &[f64],
    y: &[f64],
    which: Criterion,
    params: &TreeParams,
    allow_dummies: bool,
) -> Result<Candidates> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(Error::InsufficientData { n: x.len(), k: 3 });
    }
    let null = score_columns(y, &[], which).ok_or(Error::InsufficientData { n: x.len(), k: 1 })?;
    let mut out = vec![(Encoding::Excluded, null)];
    if x.iter().all(|&v| v == x[0]) {
        return Ok(Candidates(out));
    }

    let mut forms = vec![Encoding::Linear];
    if allow_dummies {
        if let Some(split) = best_single_split(x, y, params)? {
            forms.push(Encoding::SingleSplit(split.cut));
        }
        if let [lo, hi] = shallow_tree_cuts(x, y, params)?.cuts[..] {
            forms.push(Encoding::DoubleSplit(lo, hi));
        }
    }
    for enc in forms {
        let Ok(cols) = apply_encoding(x, "x", &enc) else {
            continue;
        };
        if let Some(score) = score_columns(y, &cols, which) {
            out.push((enc, score));
        }
    }
    Ok(Candidates(out))
}

/// Best stand-alone form of `x` for predicting `y`: excluded (intercept
/// only), linear, one cut, or two cuts. Ties go to the simpler form.
pub fn choose_univariate_form(
    x: &[f64],
    y: &[f64],
    which: Criterion,
    params: &TreeParams,
) -> Result<(Encoding, f64)> {
    params.validate()?;
    Ok(univariate_candidates(x, y, which, params, true)?.best_scored())
}

/// Per-variable forms against the response, then classical stepwise over the encoded columns.
pub fn splitwise_univariate(
    dataset: &Dataset,
    formula: &FormulaSpec,
    config: &SearchConfig,
) -> Result<SplitwiseModel> {
    require_mode(config, Mode::Univariate)?;
    let start = Instant::now();
    let terms = formula.resolve(dataset)?;
    let y = dataset.require(&formula.response)?.to_vec();

    let mut phase_one = TransformPlan::new();
    let mut origins = IndexMap::new();
    let mut names = Vec::new();
    let mut cols = Vec::new();
    for var in &terms {
        let x = dataset.require(var)?;
        let enc = univariate_candidates(
            x,
            &y,
            config.criterion,
            &config.tree_params,
            config.is_transformable(var),
        )?
        .best();
        phase_one.push(var, enc);
        for (name, col) in apply_encoding(x, var, &enc)? {
            origins.insert(name.clone(), var.clone());
            names.push(name);
            cols.push(col);
        }
    }

    let mut warnings = Vec::new();
    if names.is_empty() {
        warnings.push("every variable was excluded; returning the intercept-only model".into());
    }
    let n_cols = names.len();
    let ws = Workspace::new(y, names.clone(), cols, vec![false; n_cols], config, false);
    let initial = initial_plan(&ws, config.direction, &mut warnings)?;
    let trace = ws.run(initial, config.direction)?;

    Ok(SplitwiseModel {
        config: config.clone(),
        response: formula.response.clone(),
        variables: names,
        origins,
        phase_one: Some(phase_one.clone()),
        initial_plan: trace.initial_plan,
        initial_criterion: trace.initial_criterion,
        state: trace.state,
        history: trace.history,
        encodings_considered: phase_one,
        timing_s: start.elapsed().as_secs_f64(),
        warnings,
    })
}
