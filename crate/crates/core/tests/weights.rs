mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use star_consensus::cli::{table_spec, TABLE_COUNTS, TABLE_LENGTHS};
use star_consensus::spectral::{assemble_weight_matrix, eigh};
use star_consensus::topology::{build_network, BranchSpec};
use star_consensus::weights::*;
use star_consensus::Error;

use common::*;

fn slem_of(spec: &BranchSpec, w: &StratifiedWeights) -> f64 {
    let net = build_network(spec);
    let m = assemble_weight_matrix(&net, w).unwrap();
    // nalgebra's own solver as the reference here
    let mut vals: Vec<f64> = m.matrix().clone().symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals[1].max(-vals[vals.len() - 1])
}

fn cot_products(spec: &BranchSpec, theta: f64) -> Vec<f64> {
    let k = spec.cores() as f64;
    spec.lengths()
        .iter()
        .zip(spec.counts())
        .map(|(&m, &n)| 2.0 * k / n as f64 / (m as f64 * theta).tan() / (theta / 2.0).tan())
        .collect()
}

#[test]
fn three_path_root_is_pi_over_three() {
    let sol = solve_theta(&three_path()).unwrap();
    assert!((sol.theta - PI / 3.0).abs() < 1e-13);
    assert!((sol.slem - 0.5).abs() < 1e-13);
    // tan θ tan(θ/2) = 2/n = 1 at the root
    assert!(((PI / 3.0).tan() * (PI / 6.0).tan() - 1.0).abs() < 1e-15);
    assert!(det_a(&three_path(), PI / 3.0).unwrap().abs() < 1e-14);
}

#[test]
fn comparison_optimal_slem() {
    let sol = solve_theta(&comparison_spec()).unwrap();
    assert!((sol.slem - COMPARISON_OPTIMAL).abs() <= 1e-4, "{}", sol.slem);
}

#[test]
fn grid_first_cell() {
    let spec = BranchSpec::new(vec![3, 2, 1], vec![1, 2, 3], 1).unwrap();
    assert!((solve_theta(&spec).unwrap().slem - 0.8990).abs() <= 1e-4);
}

#[test]
fn residual_is_tiny_on_grid() {
    for r in 0..TABLE_LENGTHS.len() {
        for c in 0..TABLE_COUNTS.len() {
            let sol = solve_theta(&table_spec(r, c).unwrap()).unwrap();
            assert!(sol.residual <= 1e-12, "{r},{c}: {}", sol.residual);
            assert!(sol.theta > 0.0 && sol.theta < PI);
            assert!(sol.bracket.0 <= sol.theta && sol.theta <= sol.bracket.1);
        }
    }
}

#[test]
fn near_zero_determinant_is_positive() {
    for r in 0..TABLE_LENGTHS.len() {
        assert!(det_a(&table_spec(r, 0).unwrap(), 1e-7).unwrap() > 0.0);
    }
}

#[test]
fn poles_are_signalled() {
    let spec = BranchSpec::new(vec![1, 2], vec![2, 2], 1).unwrap();
    assert!(matches!(det_a(&spec, PI / 2.0), Err(Error::Pole { .. })));
    assert!(matches!(det_a_reduced(&spec, PI / 2.0), Err(Error::Pole { .. })));
    assert!(matches!(det_a(&spec, 0.0), Err(Error::Pole { .. })));
    assert!(det_a(&spec, PI / 4.0).is_ok());
    let three = BranchSpec::new(vec![3], vec![1], 1).unwrap();
    assert!(matches!(det_a(&three, PI / 3.0), Err(Error::Pole { .. })));
}

#[test]
fn interior_weights_are_one_half() {
    let (_, w) = closed_form(&sample_star()).unwrap();
    for branch in w.strata() {
        assert!(branch[1..].iter().all(|&x| x == 0.5));
    }
}

#[test]
fn unit_length_branch_weight() {
    for k in 1..4 {
        let spec = BranchSpec::new(vec![1, 3], vec![2, 2], k).unwrap();
        let (sol, w) = closed_form(&spec).unwrap();
        assert!((w.strata()[0][0] - (1.0 - sol.theta.cos()) / k as f64).abs() < 1e-15);
    }
}

#[test]
fn three_path_weights_and_baselines() {
    let spec = three_path();
    let net = build_network(&spec);
    let (_, w) = closed_form(&spec).unwrap();
    assert!((w.strata()[0][0] - 0.5).abs() < 1e-13);

    let metro = metropolis_weights(&net);
    assert!(metro.per_edge().unwrap().iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
    assert!((slem_of(&spec, &metro) - 2.0 / 3.0).abs() < 1e-12);

    let md = max_degree_weights(&net);
    assert!(md.per_edge().unwrap().iter().all(|&x| x == 0.5));
    assert!((slem_of(&spec, &md) - 0.5).abs() < 1e-12);

    // Laplacian spectrum {0, 1, 3}
    assert!((best_constant_alpha(&net).unwrap() - 0.5).abs() < 1e-13);
    let bc = best_constant_weights(&net).unwrap();
    let m = assemble_weight_matrix(&net, &bc).unwrap();
    let (vals, _) = eigh(m.matrix()).unwrap();
    assert!((vals[1] + vals[2]).abs() < 1e-12);
}

#[test]
fn comparison_baselines() {
    let spec = comparison_spec();
    let net = build_network(&spec);
    assert!((slem_of(&spec, &metropolis_weights(&net)) - COMPARISON_METROPOLIS).abs() <= 1e-4);
    assert!((slem_of(&spec, &max_degree_weights(&net)) - COMPARISON_MAX_DEGREE).abs() <= 1e-4);
    assert!((slem_of(&spec, &best_constant_weights(&net).unwrap()) - COMPARISON_BEST_CONSTANT).abs() <= 1e-3);
}

#[test]
fn best_constant_balances_extremes() {
    // λ₂ = −λ_N at α* for the star-like trees here
    let net = build_network(&comparison_spec());
    let alpha = best_constant_alpha(&net).unwrap();
    let l = star_consensus::spectral::laplacian(&net);
    let mut lv: Vec<f64> = l.symmetric_eigenvalues().iter().copied().collect();
    lv.sort_by(|a, b| b.total_cmp(a));
    let n = lv.len();
    assert!(((1.0 - alpha * lv[n - 2]) - (alpha * lv[0] - 1.0)).abs() < 1e-12);
}

#[test]
fn scheme_weights_reject_unruled_schemes() {
    let net = build_network(&three_path());
    assert!(scheme_weights(&net, Scheme::Numeric).is_err());
    assert!(scheme_weights(&net, Scheme::Custom).is_err());
    for s in Scheme::COMPARED {
        assert_eq!(scheme_weights(&net, s).unwrap().scheme(), s);
    }
}

#[test]
fn k_max_examples() {
    let cases = [
        (vec![3, 2, 1], vec![1, 2, 3], 15),
        (vec![5, 4, 3], vec![3, 2, 1], 77),
        (vec![4, 3, 1], vec![2, 3, 1], 39),
        (vec![3, 2, 1], vec![1, 3, 2], 16),
    ];
    for (m, n, expected) in cases {
        let spec = BranchSpec::new(m, n, 1).unwrap();
        let k = k_max(&spec).unwrap();
        assert_eq!(k, expected, "{spec}");
        assert!(replica_condition(&spec, k).unwrap().holds);
        assert!(!replica_condition(&spec, k + 1).unwrap().holds);
    }
}

#[test]
fn k_max_ignores_spec_cores() {
    let a = BranchSpec::new(vec![3, 2, 1], vec![1, 2, 3], 1).unwrap();
    assert_eq!(k_max(&a).unwrap(), k_max(&a.with_cores(7).unwrap()).unwrap());
}

#[test]
fn grid_grows_with_lengths() {
    let grid: Vec<Vec<f64>> = (0..TABLE_LENGTHS.len())
        .map(|r| (0..TABLE_COUNTS.len()).map(|c| solve_theta(&table_spec(r, c).unwrap()).unwrap().slem).collect())
        .collect();
    for (r, row) in grid.iter().enumerate() {
        // column [1 2 3] puts the fewest branches on the longest length
        assert!(row[0] < row[1]);
        for (q, other) in grid.iter().enumerate() {
            let dominates = q != r && TABLE_LENGTHS[q].iter().zip(&TABLE_LENGTHS[r]).all(|(a, b)| a >= b);
            if dominates {
                assert!(other.iter().zip(row).all(|(a, b)| a > b), "rows {q} vs {r}");
            }
        }
    }
}

#[test]
fn adding_a_branch_slows_convergence() {
    for r in 0..TABLE_LENGTHS.len() {
        for c in 0..TABLE_COUNTS.len() {
            let spec = table_spec(r, c).unwrap();
            let base = solve_theta(&spec).unwrap().slem;
            for p in 0..3 {
                let mut n = spec.counts().to_vec();
                n[p] += 1;
                let more = BranchSpec::new(spec.lengths().to_vec(), n, 1).unwrap();
                assert!(solve_theta(&more).unwrap().slem > base);
                let mut m = spec.lengths().to_vec();
                m[p] += 10;
                let longer = BranchSpec::new(m, spec.counts().to_vec(), 1).unwrap();
                assert!(solve_theta(&longer).unwrap().slem > base);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn determinant_identity(spec in arb_spec(4, 4), u in 0.0..1.0f64) {
        // sample θ away from every pole of cot(m θ) and cot(θ/2)
        let top = spec.max_length() as f64;
        let theta = (0.02 + 0.96 * u) * PI / top;
        let c = cot_products(&spec, theta);
        let far_from_pole = spec.lengths().iter().all(|&m| (m as f64 * theta).sin().abs() > 1e-3);
        prop_assume!(far_from_pole);
        let direct = det_a(&spec, theta).unwrap();
        let reduced = det_a_reduced(&spec, theta).unwrap();
        let full: f64 = c.iter().map(|x| x.abs()).product();
        let scale = full + (0..c.len()).map(|i| full / c[i].abs()).sum::<f64>();
        prop_assert!((direct - reduced).abs() <= 1e-10 * scale, "{} vs {}", direct, reduced);
        let lemma = c.iter().product::<f64>() * (1.0 - c.iter().map(|x| 1.0 / x).sum::<f64>());
        prop_assert!((lemma - reduced).abs() <= 1e-10 * scale);
    }

    #[test]
    fn single_type_reduction(m in 1..8usize, n in 1..8usize, k in 1..4usize) {
        let spec = BranchSpec::new(vec![m], vec![n], k).unwrap();
        let theta = solve_theta(&spec).unwrap().theta;
        let (m, n, k) = (m as f64, n as f64, k as f64);
        let r = (n - 2.0 * k) * ((m - 0.5) * theta).cos() - (n + 2.0 * k) * ((m + 0.5) * theta).cos();
        prop_assert!(r.abs() / (n + 2.0 * k) <= 1e-10);
        prop_assert!(small_b_residual(&spec, theta).unwrap().unwrap() <= 1e-10);
    }

    #[test]
    fn two_type_reduction(spec in arb_spec(2, 3)) {
        prop_assume!(spec.branch_types() == 2);
        let theta = solve_theta(&spec).unwrap().theta;
        let c = cot_products(&spec, theta);
        prop_assert!(((c[0] - 1.0) * (c[1] - 1.0) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn longer_branches_get_larger_center_weights(spec in arb_spec(4, 3)) {
        let (_, w) = closed_form(&spec).unwrap();
        let w1 = w.center_weights();
        for p in 0..w1.len() {
            for q in 0..w1.len() {
                if spec.lengths()[p] < spec.lengths()[q] {
                    prop_assert!(w1[p] < w1[q]);
                }
            }
        }
        prop_assert!(w.flat().iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn joint_permutation_leaves_weights(spec in arb_spec(4, 3), seed in any::<u64>()) {
        let b = spec.branch_types();
        let mut order: Vec<usize> = (0..b).collect();
        order.sort_by_key(|&i| (seed.rotate_left(i as u32 * 7) ^ i as u64, i));
        let permuted = BranchSpec::new(
            order.iter().map(|&i| spec.lengths()[i]).collect(),
            order.iter().map(|&i| spec.counts()[i]).collect(),
            spec.cores(),
        ).unwrap();
        let (s1, w1) = closed_form(&spec).unwrap();
        let (s2, w2) = closed_form(&permuted).unwrap();
        prop_assert!((s1.theta - s2.theta).abs() < 1e-13);
        for (new, &old) in order.iter().enumerate() {
            let (a, b) = (&w2.strata()[new], &w1.strata()[old]);
            prop_assert_eq!(a.len(), b.len());
            prop_assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12));
        }
    }

    #[test]
    fn k_max_boundary(spec in arb_spec(3, 1)) {
        let k = k_max(&spec).unwrap();
        prop_assert!(k >= 1);
        if k > 1 {
            prop_assert!(replica_condition(&spec, k).unwrap().holds);
        }
        prop_assert!(!replica_condition(&spec, k + 1).unwrap().holds);
    }
}
