use serde::{Deserialize, Serialize};

use crate::baselines::ElasticNetConfig;
use crate::error::{Error, Result};
use crate::linmod::Criterion;
use crate::search::{Direction, Mode, SearchConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Splitwise,
    Stepwise,
    BestSubset,
    Lasso,
    Ridge,
    ElasticNet,
}

impl Family {
    pub fn is_penalized(self) -> bool {
        matches!(self, Family::Lasso | Family::Ridge | Family::ElasticNet)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Settings {
    Search(SearchConfig),
    BestSubset { min_size: usize, max_size: usize },
    Penalized(ElasticNetConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    /// Stable identifier used on the command line, e.g. `splitwise-iter-backward`.
    pub id: String,
    pub family: Family,
    /// Short settings description, e.g. `iter.; backw.`.
    pub label: String,
    pub settings: Settings,
}

fn direction_label(d: Direction) -> &'static str {
    match d {
        Direction::Forward => "forw.",
        Direction::Backward => "backw.",
        Direction::Both => "both",
    }
}

impl MethodSpec {
    fn search(mode: Mode, direction: Direction) -> Self {
        let (family, prefix, label_prefix) = match mode {
            Mode::Iterative => (Family::Splitwise, "splitwise-iter", "iter.; "),
            Mode::Univariate => (Family::Splitwise, "splitwise-univ", "univ.; "),
            Mode::Classical => (Family::Stepwise, "stepwise", ""),
        };
        MethodSpec {
            id: format!("{prefix}-{direction}"),
            family,
            label: format!("{label_prefix}{}", direction_label(direction)),
            settings: Settings::Search(SearchConfig::new(mode, direction, Criterion::Aic)),
        }
    }

    fn penalized(id: &str, family: Family, alpha: f64) -> Self {
        MethodSpec {
            id: id.into(),
            family,
            label: format!("alpha = {alpha}; lambda: CV"),
            settings: Settings::Penalized(ElasticNetConfig::with_alpha(alpha)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.settings {
            Settings::Search(c) => c.validate(),
            Settings::BestSubset { min_size, max_size } if *min_size >= 1 && min_size <= max_size => Ok(()),
            Settings::BestSubset { .. } => Err(Error::InvalidConfig(format!("{}: bad subset window", self.id))),
            Settings::Penalized(c) => c.validate(),
        }
    }

    /// Whether the method reports AIC/BIC.
    pub fn has_information_criteria(&self) -> bool {
        !self.family.is_penalized()
    }
}

/// Every method the harness knows, in display order.
pub fn catalog() -> Vec<MethodSpec> {
    let dirs = [Direction::Forward, Direction::Backward, Direction::Both];
    let mut out = Vec::new();
    for mode in [Mode::Iterative, Mode::Univariate, Mode::Classical] {
        out.extend(dirs.iter().map(|&d| MethodSpec::search(mode, d)));
    }
    out.push(MethodSpec {
        id: "best-subset".into(),
        family: Family::BestSubset,
        label: "size: 3--4".into(),
        settings: Settings::BestSubset { min_size: 3, max_size: 4 },
    });
    out.push(MethodSpec::penalized("lasso", Family::Lasso, 1.0));
    out.push(MethodSpec::penalized("ridge", Family::Ridge, 0.0));
    out.push(MethodSpec::penalized("enet", Family::ElasticNet, 0.5));
    out
}

pub fn method_ids() -> Vec<String> {
    catalog().into_iter().map(|m| m.id).collect()
}

/// Parses a comma-separated list of method identifiers; `all` selects the whole catalog.
pub fn parse_methods(list: &str) -> Result<Vec<MethodSpec>> {
    let all = catalog();
    let mut out: Vec<MethodSpec> = Vec::new();
    for token in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if token == "all" {
            for m in &all {
                if !out.iter().any(|o| o.id == m.id) {
                    out.push(m.clone());
                }
            }
            continue;
        }
        let Some(m) = all.iter().find(|m| m.id == token) else {
            return Err(Error::UnknownMethod(format!(
                "{token}; valid methods: {}",
                method_ids().join(", ")
            )));
        };
        if !out.iter().any(|o| o.id == m.id) {
            out.push(m.clone());
        }
    }
    if out.is_empty() {
        return Err(Error::UnknownMethod(format!(
            "empty list; valid methods: {}",
            method_ids().join(", ")
        )));
    }
    Ok(out)
}
