//! Comparison methods: exhaustive best-subset selection and penalized
//! regression (ridge, lasso, elastic net) with cross-validated penalty.

mod enet;
mod subset;

pub use enet::{
    cv_select_lambda, cv_select_lambda_with_folds, elastic_net_fit, fold_assignment, lambda_grid,
    lambda_max, CvPoint, CvResult, ElasticNetConfig, ElasticNetFit, LambdaGrid, Solver,
    ACTIVE_THRESHOLD,
};
pub use subset::{best_subset, BestSubsetConfig, BestSubsetResult, DEFAULT_HARD_CAP};

use crate::data::{Dataset, FormulaSpec};
use crate::error::Result;

/// Term names, their columns and the response.
fn design_columns<'a>(
    dataset: &'a Dataset,
    formula: &FormulaSpec,
) -> Result<(Vec<String>, Vec<&'a [f64]>, &'a [f64])> {
    let terms = formula.resolve(dataset)?;
    let cols = terms
        .iter()
        .map(|t| dataset.require(t))
        .collect::<Result<Vec<_>>>()?;
    let y = dataset.require(&formula.response)?;
    Ok((terms, cols, y))
}
