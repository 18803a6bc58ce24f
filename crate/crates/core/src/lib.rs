//! Stepwise linear-model selection where numeric predictors may enter as
//! linear terms or as threshold dummies found by shallow regression trees.

pub mod baselines;
pub mod bench;
pub mod data;
pub mod error;
pub mod encode;
pub mod linmod;
pub mod search;
pub mod treesplit;

pub use baselines::{BestSubsetConfig, ElasticNetConfig, ElasticNetFit};
pub use bench::{AggregateRow, MethodSpec, RunRecord};
pub use data::{Dataset, FormulaSpec, GroundTruth, SynthConfig};
pub use error::{Error, Result};
pub use encode::{Encoding, TransformPlan};
pub use linmod::{Criterion, DesignMatrix, OlsFit};
pub use search::{Direction, Mode, SearchConfig, SplitwiseModel};
pub use treesplit::TreeParams;
