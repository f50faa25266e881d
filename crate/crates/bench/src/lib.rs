//! Shared benchmark inputs.

use paflow::equivalence::twist_all;
use paflow::{fixtures, spec_census, CensusOptions, GluingMatrix, ModelFlowSpec};

/// The default two-piece census.
pub fn census_specs() -> Vec<ModelFlowSpec> {
    spec_census(CensusOptions::default()).expect("default census builds")
}

/// Pairs `(s, twisted s)` that are equivalent only up to vertical twists.
pub fn twisted_pairs() -> Vec<(ModelFlowSpec, ModelFlowSpec)> {
    census_specs()
        .into_iter()
        .chain([fixtures::marked_two_banana_spec()])
        .map(|s| {
            let t = twist_all(&s, 3, -2).expect("small twists never overflow");
            (s, t)
        })
        .collect()
}

/// Admissible matrices with entries growing like Fibonacci numbers.
pub fn fibonacci_matrices(count: usize) -> Vec<GluingMatrix> {
    let step = GluingMatrix::new(1, 1, 1, 0);
    std::iter::successors(Some(step), |m| m.checked_mul(&step)).take(count).collect()
}
