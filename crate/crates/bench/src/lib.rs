//! Fixtures shared by the criterion benchmarks.

use splitwise::data::{generate_synthetic, parse_formula};
use splitwise::{Dataset, FormulaSpec, SynthConfig};

/// Synthetic dataset with the default signal layout and a `y ~ .` formula.
pub fn synthetic(n: usize, p: usize, threshold_effects: bool, seed: u64) -> (Dataset, FormulaSpec) {
    let (data, _) = generate_synthetic(&SynthConfig::with_defaults(n, p, threshold_effects, seed))
        .expect("valid synthetic config");
    let formula = parse_formula("y ~ .", &data).expect("formula resolves");
    (data, formula)
}
