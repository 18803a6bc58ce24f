use std::time::Instant;

use indexmap::IndexMap;

use super::univariate::univariate_candidates;
use super::{
    require_mode, Action, BackwardInit, Direction, Mode, ModelState, SearchConfig, SplitwiseModel,
    StepAction, TreeTarget, IMPROVEMENT_TOL,
};
use crate::data::{Dataset, FormulaSpec};
use crate::encode::{apply_encoding, encode_columns, Encoding, TransformPlan};
use crate::error::{Error, Result};
use crate::linmod::{self, criterion, fit_ols, DesignMatrix, OlsFit};
use crate::treesplit::{best_single_split, shallow_tree_cuts};

/// Response, candidate columns and scoring rules for one search.
pub(crate) struct Workspace {
    y: Vec<f64>,
    vars: Vec<String>,
    xs: Vec<Vec<f64>>,
    transformable: Vec<bool>,
    config: SearchConfig,
    allow_switch: bool,
}

impl Workspace {
    pub(crate) fn new(
        y: Vec<f64>,
        vars: Vec<String>,
        xs: Vec<Vec<f64>>,
        transformable: Vec<bool>,
        config: &SearchConfig,
        allow_switch: bool,
    ) -> Self {
        Workspace {
            y,
            vars,
            xs,
            transformable,
            config: config.clone(),
            allow_switch,
        }
    }

    fn from_dataset(dataset: &Dataset, formula: &FormulaSpec, config: &SearchConfig) -> Result<Self> {
        let vars = formula.resolve(dataset)?;
        let y = dataset.require(&formula.response)?.to_vec();
        let xs = vars
            .iter()
            .map(|v| dataset.require(v).map(<[f64]>::to_vec))
            .collect::<Result<_>>()?;
        let transformable = vars.iter().map(|v| config.is_transformable(v)).collect();
        Ok(Self::new(
            y,
            vars,
            xs,
            transformable,
            config,
            config.mode == Mode::Iterative,
        ))
    }

    /// Workspace matching a finished model, built over (possibly new) data.
    pub(crate) fn for_model(model: &SplitwiseModel, dataset: &Dataset) -> Result<Self> {
        let y = dataset.require(&model.response)?.to_vec();
        let xs = match &model.phase_one {
            Some(plan) => {
                let mut cols = IndexMap::new();
                for (var, enc) in plan.iter() {
                    for (name, col) in encode_columns(dataset.require(var)?, var, enc) {
                        cols.insert(name, col);
                    }
                }
                model
                    .variables
                    .iter()
                    .map(|v| {
                        cols.swap_remove(v)
                            .ok_or_else(|| Error::UnknownColumn(v.clone()))
                    })
                    .collect::<Result<_>>()?
            }
            None => model
                .variables
                .iter()
                .map(|v| dataset.require(v).map(<[f64]>::to_vec))
                .collect::<Result<_>>()?,
        };
        Ok(Self::new(
            y,
            model.variables.clone(),
            xs,
            vec![false; model.variables.len()],
            &model.config,
            false,
        ))
    }

    pub(crate) fn vars(&self) -> &[String] {
        &self.vars
    }

    fn column(&self, var: &str) -> &[f64] {
        let i = self.vars.iter().position(|v| v == var).expect("variable in workspace");
        &self.xs[i]
    }

    fn design(&self, plan: &TransformPlan, checked: bool) -> Result<DesignMatrix> {
        let mut cols = Vec::new();
        for (var, enc) in plan.iter() {
            let x = self.column(var);
            if checked {
                cols.extend(apply_encoding(x, var, enc)?);
            } else {
                cols.extend(encode_columns(x, var, enc));
            }
        }
        DesignMatrix::with_intercept(
            self.y.len(),
            cols.iter().map(|(n, c)| (n.as_str(), c.as_slice())),
        )
    }

    fn fit(&self, plan: &TransformPlan) -> Result<OlsFit> {
        fit_ols(&self.design(plan, true)?, &self.y)
    }

    /// Criterion value; a saturated fit scores negative infinity.
    fn score(&self, fit: &OlsFit) -> f64 {
        criterion(fit, self.config.criterion).unwrap_or(f64::NEG_INFINITY)
    }

    /// Candidates that fail to encode or fit are dropped.
    fn evaluate(&self, plan: &TransformPlan) -> Option<f64> {
        self.fit(plan).ok().map(|f| self.score(&f))
    }

    pub(crate) fn state(&self, plan: TransformPlan) -> Result<ModelState> {
        let fit = self.fit(&plan)?;
        let criterion_value = self.score(&fit);
        Ok(ModelState {
            plan,
            fit,
            criterion_value,
        })
    }

    pub(crate) fn predict(&self, state: &ModelState) -> Result<Vec<f64>> {
        linmod::predict(&state.fit, &self.design(&state.plan, false)?)
    }

    /// Dummy forms for `var` with cuts from trees fitted to `target`.
    fn dummy_forms(&self, idx: usize, target: &[f64]) -> Vec<Encoding> {
        if !self.transformable[idx] {
            return Vec::new();
        }
        let x = &self.xs[idx];
        let params = &self.config.tree_params;
        let mut forms = Vec::with_capacity(2);
        if let Ok(Some(split)) = best_single_split(x, target, params) {
            forms.push(Encoding::SingleSplit(split.cut));
        }
        if let Ok(tree) = shallow_tree_cuts(x, target, params) {
            if let [lo, hi] = tree.cuts[..] {
                forms.push(Encoding::DoubleSplit(lo, hi));
            }
        }
        forms
    }

    /// Lowest-criterion form of `var` when joined to `base`; simpler forms win ties.
    fn best_form(
        &self,
        base: &TransformPlan,
        idx: usize,
        target: &[f64],
        skip: Option<Encoding>,
    ) -> Option<(Encoding, f64)> {
        let var = &self.vars[idx];
        let mut best: Option<(Encoding, f64)> = None;
        let forms = std::iter::once(Encoding::Linear).chain(self.dummy_forms(idx, target));
        for enc in forms.filter(|e| Some(*e) != skip) {
            let mut plan = base.clone();
            plan.set(var, enc, &self.vars);
            if let Some(score) = self.evaluate(&plan) {
                if best.is_none_or(|(_, s)| score < s) {
                    best = Some((enc, score));
                }
            }
        }
        best
    }

    fn tree_target<'a>(&'a self, residuals: &'a [f64]) -> &'a [f64] {
        match self.config.tree_target {
            TreeTarget::Residuals => residuals,
            TreeTarget::Response => &self.y,
        }
    }

    /// The best single action from `state`, if any candidate could be fitted.
    fn best_action(&self, state: &ModelState, direction: Direction) -> Option<(f64, Action)> {
        let mut best: Option<(f64, Action)> = None;
        let mut consider = |score: f64, action: Action| {
            if best.as_ref().is_none_or(|(s, _)| score < *s) {
                best = Some((score, action));
            }
        };

        if direction != Direction::Backward {
            let target = self.tree_target(&state.fit.residuals);
            for (idx, var) in self.vars.iter().enumerate() {
                if state.plan.contains(var) {
                    continue;
                }
                if let Some((encoding, score)) = self.best_form(&state.plan, idx, target, None) {
                    consider(score, Action::Add { var: var.clone(), encoding });
                }
            }
        }

        if self.allow_switch {
            for (idx, var) in self.vars.iter().enumerate() {
                let Some(&current) = state.plan.get(var) else {
                    continue;
                };
                let mut base = state.plan.clone();
                base.remove(var);
                let residuals = match self.config.tree_target {
                    TreeTarget::Residuals => match self.fit(&base) {
                        Ok(fit) => fit.residuals,
                        Err(_) => continue,
                    },
                    TreeTarget::Response => Vec::new(),
                };
                let target = self.tree_target(&residuals);
                if let Some((encoding, score)) = self.best_form(&base, idx, target, Some(current)) {
                    consider(score, Action::Switch { var: var.clone(), encoding });
                }
            }
        }

        if direction != Direction::Forward {
            for var in state.plan.variables() {
                let mut plan = state.plan.clone();
                plan.remove(var);
                if let Some(score) = self.evaluate(&plan) {
                    consider(score, Action::Remove { var: var.to_string() });
                }
            }
        }
        best
    }

    /// Greedy descent from `initial` until no action improves the criterion.
    pub(crate) fn run(&self, initial: TransformPlan, direction: Direction) -> Result<SearchTrace> {
        let mut considered: IndexMap<String, Encoding> = self
            .vars
            .iter()
            .map(|v| (v.clone(), initial.get(v).copied().unwrap_or(Encoding::Excluded)))
            .collect();
        let mut state = self.state(initial.clone())?;
        let initial_criterion = state.criterion_value;
        let mut history = Vec::new();

        while let Some((score, action)) = self.best_action(&state, direction) {
            if !(score < state.criterion_value - IMPROVEMENT_TOL) {
                break;
            }
            let mut plan = state.plan.clone();
            action.apply(&mut plan, &self.vars);
            let next = self.state(plan)?;
            if let Action::Add { var, encoding } | Action::Switch { var, encoding } = &action {
                considered.insert(var.clone(), *encoding);
            }
            history.push(StepAction {
                delta: next.criterion_value - state.criterion_value,
                criterion_value: next.criterion_value,
                action,
            });
            state = next;
        }

        Ok(SearchTrace {
            initial_plan: initial,
            initial_criterion,
            state,
            history,
            considered: considered.into_iter().collect(),
        })
    }

    /// Full model for backward search.
    fn backward_start(&self, warnings: &mut Vec<String>) -> Result<TransformPlan> {
        let linear: TransformPlan = self
            .vars
            .iter()
            .map(|v| (v.clone(), Encoding::Linear))
            .collect();
        if self.config.mode != Mode::Iterative || self.config.backward_init == BackwardInit::Linear {
            return Ok(linear);
        }
        let mut plan = TransformPlan::new();
        for (idx, var) in self.vars.iter().enumerate() {
            let forms = univariate_candidates(
                &self.xs[idx],
                &self.y,
                self.config.criterion,
                &self.config.tree_params,
                self.transformable[idx],
            );
            let enc = match forms.map(|c| c.best()) {
                Ok(Encoding::Excluded) | Err(_) => Encoding::Linear,
                Ok(enc) => enc,
            };
            plan.push(var, enc);
        }
        if self.fit(&plan).is_ok() {
            return Ok(plan);
        }
        warnings.push("full model with univariate forms is not estimable; starting from linear terms".into());
        Ok(linear)
    }
}

pub(crate) struct SearchTrace {
    pub initial_plan: TransformPlan,
    pub initial_criterion: f64,
    pub state: ModelState,
    pub history: Vec<StepAction>,
    pub considered: TransformPlan,
}

pub(crate) fn initial_plan(
    ws: &Workspace,
    direction: Direction,
    warnings: &mut Vec<String>,
) -> Result<TransformPlan> {
    match direction {
        Direction::Forward | Direction::Both => Ok(TransformPlan::new()),
        Direction::Backward => ws.backward_start(warnings),
    }
}

fn run_on_dataset(dataset: &Dataset, formula: &FormulaSpec, config: &SearchConfig) -> Result<SplitwiseModel> {
    let start = Instant::now();
    let ws = Workspace::from_dataset(dataset, formula, config)?;
    let mut warnings = Vec::new();
    let initial = initial_plan(&ws, config.direction, &mut warnings)?;
    let trace = ws.run(initial, config.direction)?;
    let variables = ws.vars().to_vec();
    Ok(SplitwiseModel {
        config: config.clone(),
        response: formula.response.clone(),
        origins: variables.iter().map(|v| (v.clone(), v.clone())).collect(),
        variables,
        phase_one: None,
        initial_plan: trace.initial_plan,
        initial_criterion: trace.initial_criterion,
        state: trace.state,
        history: trace.history,
        encodings_considered: trace.considered,
        timing_s: start.elapsed().as_secs_f64(),
        warnings,
    })
}

/// Stepwise search where each variable may enter linearly or as tree-derived dummies.
pub fn splitwise_iterative(
    dataset: &Dataset,
    formula: &FormulaSpec,
    config: &SearchConfig,
) -> Result<SplitwiseModel> {
    require_mode(config, Mode::Iterative)?;
    run_on_dataset(dataset, formula, config)
}

/// Linear-only stepwise search by AIC/BIC.
pub fn classical_stepwise(
    dataset: &Dataset,
    formula: &FormulaSpec,
    config: &SearchConfig,
) -> Result<SplitwiseModel> {
    require_mode(config, Mode::Classical)?;
    run_on_dataset(dataset, formula, config)
}
