//! Reference values and shared generators.

#![allow(dead_code)]

use proptest::prelude::*;
use star_consensus::BranchSpec;

/// Closed-form SLEM grid, rows by branch lengths and columns by counts in the
/// order of `cli::TABLE_LENGTHS` / `cli::TABLE_COUNTS`.
pub const GRID_SLEM: [[f64; 6]; 9] = [
    [0.8990, 0.9223, 0.9200, 0.9025, 0.9157, 0.9102],
    [0.9352, 0.9483, 0.9477, 0.9358, 0.9434, 0.9421],
    [0.9378, 0.9505, 0.9488, 0.9401, 0.9472, 0.9433],
    [0.9402, 0.9512, 0.9501, 0.9418, 0.9479, 0.9454],
    [0.9569, 0.9645, 0.9639, 0.9574, 0.9617, 0.9606],
    [0.9575, 0.9647, 0.9644, 0.9578, 0.9620, 0.9613],
    [0.9582, 0.9657, 0.9645, 0.9596, 0.9638, 0.9612],
    [0.9589, 0.9659, 0.9650, 0.9602, 0.9641, 0.9619],
    [0.9602, 0.9663, 0.9657, 0.9611, 0.9644, 0.9630],
];

/// `K_max` on the same grid.
pub const GRID_K_MAX: [[usize; 6]; 9] = [
    [15, 27, 25, 16, 22, 19],
    [20, 43, 42, 21, 33, 30],
    [24, 47, 44, 27, 39, 32],
    [28, 49, 47, 30, 40, 36],
    [30, 68, 65, 33, 52, 46],
    [33, 69, 68, 35, 53, 50],
    [36, 74, 68, 42, 61, 49],
    [39, 75, 71, 44, 62, 53],
    [44, 77, 74, 47, 64, 57],
];

/// SLEM of the m = [1 2 3], n = [4 3 2] star per scheme.
pub const COMPARISON_OPTIMAL: f64 = 0.9213;
pub const COMPARISON_METROPOLIS: f64 = 0.9718;
pub const COMPARISON_MAX_DEGREE: f64 = 0.9780;
pub const COMPARISON_BEST_CONSTANT: f64 = 0.9614;

pub fn comparison_spec() -> BranchSpec {
    BranchSpec::new(vec![1, 2, 3], vec![4, 3, 2], 1).unwrap()
}

pub fn sample_star() -> BranchSpec {
    BranchSpec::new(vec![1, 2, 3], vec![4, 3, 3], 1).unwrap()
}

pub fn cored_star(k: usize) -> BranchSpec {
    BranchSpec::new(vec![2, 3, 4], vec![3, 2, 2], k).unwrap()
}

pub fn three_path() -> BranchSpec {
    BranchSpec::new(vec![1], vec![2], 1).unwrap()
}

/// Specs with `1..=max_b` branch types of distinct lengths in `1..=6`,
/// counts in `1..=4` and `1..=max_k` centers.
pub fn arb_spec(max_b: usize, max_k: usize) -> impl Strategy<Value = BranchSpec> {
    (1..=max_b)
        .prop_flat_map(move |b| {
            (
                proptest::sample::subsequence((1..=6usize).collect::<Vec<_>>(), b).prop_shuffle(),
                proptest::collection::vec(1..=4usize, b),
                1..=max_k,
            )
        })
        .prop_map(|(m, n, k)| BranchSpec::new(m, n, k).unwrap())
}

/// Like [`arb_spec`] with every count at least two and one center.
pub fn arb_plain_spec(max_b: usize) -> impl Strategy<Value = BranchSpec> {
    (1..=max_b)
        .prop_flat_map(|b| {
            (
                proptest::sample::subsequence((1..=6usize).collect::<Vec<_>>(), b).prop_shuffle(),
                proptest::collection::vec(2..=4usize, b),
            )
        })
        .prop_map(|(m, n)| BranchSpec::new(m, n, 1).unwrap())
}

/// Stratum weights drawn from `(0.05, 0.45)`.
pub fn arb_weights(spec: &BranchSpec) -> impl Strategy<Value = Vec<Vec<f64>>> {
    spec.lengths().iter().map(|&m| proptest::collection::vec(0.05..0.45f64, m)).collect::<Vec<_>>()
}
