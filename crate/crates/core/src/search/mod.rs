//! Stepwise search over variables and their encodings.
//!
//! Three modes share one engine:
//!
//! * **iterative**: each step considers adding an excluded variable in its
//!   best form (linear or tree-derived dummies), removing an included one, or
//!   switching an included variable to a different form. Tree cuts are fitted
//!   against the residuals of the model the variable would join.
//! * **univariate**: every variable first gets its best stand-alone form
//!   against the response; the resulting columns then go through classical
//!   stepwise selection.
//! * **classical**: plain AIC/BIC stepwise over linear terms.
//!
//! A step is applied only if it lowers the criterion by more than
//! [`IMPROVEMENT_TOL`], so every history is strictly decreasing and finite.

mod engine;
pub mod summary;
mod univariate;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FormulaSpec};
use crate::encode::{Encoding, TransformPlan};
use crate::error::{Error, Result};
use crate::linmod::{Criterion, OlsFit};
use crate::treesplit::TreeParams;

pub use engine::{classical_stepwise, splitwise_iterative};
pub use univariate::{choose_univariate_form, splitwise_univariate};

/// Minimum criterion drop for a step to count as an improvement.
pub const IMPROVEMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Iterative,
    Univariate,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    #[default]
    Backward,
    Both,
}

/// What the shallow tree is fitted against in iterative mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeTarget {
    #[default]
    Residuals,
    Response,
}

/// Encodings of the full starting model for backward search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackwardInit {
    #[default]
    BestUnivariate,
    Linear,
}

macro_rules! impl_from_str {
    ($ty:ty, $($text:literal => $val:expr),+ $(,)?) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    $($text => Ok($val),)+
                    _ => Err(Error::InvalidConfig(format!(
                        concat!("unknown ", stringify!($ty), " {:?}"), s
                    ))),
                }
            }
        }
    };
}

impl_from_str!(Mode, "iterative" => Mode::Iterative, "univariate" => Mode::Univariate, "classical" => Mode::Classical);
impl_from_str!(Direction, "forward" => Direction::Forward, "backward" => Direction::Backward, "both" => Direction::Both);
impl_from_str!(TreeTarget, "residuals" => TreeTarget::Residuals, "response" => TreeTarget::Response);

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Iterative => "iterative",
            Mode::Univariate => "univariate",
            Mode::Classical => "classical",
        })
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
            Direction::Both => "both",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub mode: Mode,
    pub direction: Direction,
    pub criterion: Criterion,
    pub tree_params: TreeParams,
    /// Variables allowed to take dummy forms; `None` means all terms.
    pub transformable: Option<BTreeSet<String>>,
    pub tree_target: TreeTarget,
    pub backward_init: BackwardInit,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            mode: Mode::Iterative,
            direction: Direction::Backward,
            criterion: Criterion::Aic,
            tree_params: TreeParams::default(),
            transformable: None,
            tree_target: TreeTarget::Residuals,
            backward_init: BackwardInit::BestUnivariate,
        }
    }
}

impl SearchConfig {
    pub fn new(mode: Mode, direction: Direction, criterion: Criterion) -> Self {
        SearchConfig {
            mode,
            direction,
            criterion,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode != Mode::Classical {
            self.tree_params.validate()?;
        }
        Ok(())
    }

    fn is_transformable(&self, var: &str) -> bool {
        self.mode != Mode::Classical
            && self
                .transformable
                .as_ref()
                .is_none_or(|set| set.contains(var))
    }
}

/// The current model: a plan over included variables and its fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub plan: TransformPlan,
    pub fit: OlsFit,
    pub criterion_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "lowercase")]
pub enum Action {
    Add { var: String, encoding: Encoding },
    Remove { var: String },
    Switch { var: String, encoding: Encoding },
}

impl Action {
    pub fn var(&self) -> &str {
        match self {
            Action::Add { var, .. } | Action::Remove { var } | Action::Switch { var, .. } => var,
        }
    }

    fn apply(&self, plan: &mut TransformPlan, order: &[String]) {
        match self {
            Action::Add { var, encoding } | Action::Switch { var, encoding } => {
                plan.set(var, *encoding, order)
            }
            Action::Remove { var } => {
                plan.remove(var);
            }
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Add { var, encoding } => write!(f, "+ {var} [{}]", encoding.short_label()),
            Action::Remove { var } => write!(f, "- {var}"),
            Action::Switch { var, encoding } => write!(f, "~ {var} [{}]", encoding.short_label()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepAction {
    #[serde(flatten)]
    pub action: Action,
    /// Criterion after applying the action.
    pub criterion_value: f64,
    /// Change relative to the previous state (negative).
    pub delta: f64,
}

#[derive(Debug, Clone)]
pub struct SplitwiseModel {
    pub config: SearchConfig,
    pub response: String,
    /// Variables the search ran over (encoded columns in univariate mode).
    pub variables: Vec<String>,
    /// Working variable to the dataset column it came from.
    pub origins: IndexMap<String, String>,
    /// Univariate mode: per-variable forms chosen in the first phase.
    pub phase_one: Option<TransformPlan>,
    pub initial_plan: TransformPlan,
    pub initial_criterion: f64,
    pub state: ModelState,
    pub history: Vec<StepAction>,
    /// Final form of every term, including the form an excluded variable last had.
    pub encodings_considered: TransformPlan,
    pub timing_s: f64,
    pub warnings: Vec<String>,
}

impl SplitwiseModel {
    /// Original dataset columns in the final model, sorted.
    pub fn selected_variables(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self
            .state
            .plan
            .variables()
            .map(|v| self.origins.get(v).map_or(v, String::as_str))
            .collect();
        set.into_iter().map(str::to_string).collect()
    }

    pub fn criterion_value(&self) -> f64 {
        self.state.criterion_value
    }

    pub fn fit(&self) -> &OlsFit {
        &self.state.fit
    }

    /// Checks that the recorded criterion values strictly decrease and are finite.
    pub fn check_history(&self) -> Result<()> {
        let mut prev = self.initial_criterion;
        for step in &self.history {
            let ok = step.criterion_value < prev - IMPROVEMENT_TOL || step.criterion_value == f64::NEG_INFINITY;
            if !ok || step.criterion_value.is_nan() {
                return Err(Error::InvalidConfig(format!(
                    "history not strictly decreasing at {}: {} after {}",
                    step.action, step.criterion_value, prev
                )));
            }
            prev = step.criterion_value;
        }
        if prev != self.state.criterion_value {
            return Err(Error::InvalidConfig(
                "final criterion differs from the last history entry".into(),
            ));
        }
        Ok(())
    }

    /// Rebuilds the final state from the initial plan and the history.
    pub fn replay(&self, dataset: &Dataset) -> Result<ModelState> {
        let ws = engine::Workspace::for_model(self, dataset)?;
        let mut plan = self.initial_plan.clone();
        for step in &self.history {
            step.action.apply(&mut plan, &self.variables);
        }
        ws.state(plan)
    }

    /// Predictions for `dataset`, which must contain every variable the model uses.
    pub fn predict(&self, dataset: &Dataset) -> Result<Vec<f64>> {
        let ws = engine::Workspace::for_model(self, dataset)?;
        ws.predict(&self.state)
    }
}

/// Runs the mode named in `config`.
pub fn fit_model(dataset: &Dataset, formula: &FormulaSpec, config: &SearchConfig) -> Result<SplitwiseModel> {
    match config.mode {
        Mode::Iterative => splitwise_iterative(dataset, formula, config),
        Mode::Univariate => splitwise_univariate(dataset, formula, config),
        Mode::Classical => classical_stepwise(dataset, formula, config),
    }
}

fn require_mode(config: &SearchConfig, mode: Mode) -> Result<()> {
    if config.mode != mode {
        return Err(Error::InvalidConfig(format!(
            "expected mode {mode}, got {}",
            config.mode
        )));
    }
    config.validate()
}
