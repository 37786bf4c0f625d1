//! The characteristic equation `|A(θ)| = 0` and its smallest root on (0, π).
//!
//! `A` is the `B × B` matrix with diagonal `c_i − 1`, where
//! `c_i = (2K / n_i) cot(m_i θ) cot(θ/2)`, and off-diagonal `−sqrt(n_j / n_i)`.
//! Writing `A = diag(c) − u vᵀ` with `u_i = 1/sqrt(n_i)`, `v_j = sqrt(n_j)`
//! gives `|A| = Π c_i · (1 − Σ 1/c_i)`, so away from poles the roots are
//! those of `g(θ) = Σ (n_i / 2K) tan(m_i θ) tan(θ/2) − 1`. The tangent poles
//! sit at `(2k + 1) π / (2 m_i)` and can be listed exactly, which is what
//! makes the bracket search sound.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::topology::BranchSpec;
use crate::{Error, Result};

/// `|sin|` below this counts as sitting on a pole of a cotangent.
const POLE_GUARD: f64 = 1e-12;
/// Grid cells per unit of the longest branch length.
const GRID_PER_LENGTH: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaSolution {
    pub theta: f64,
    /// `cos θ`, the SLEM under optimal weights.
    pub slem: f64,
    /// `|det A(θ)|` divided by the magnitude of the terms it cancels.
    pub residual: f64,
    /// Sign-changing grid cell the root was bisected in.
    pub bracket: (f64, f64),
}

fn cot_terms(spec: &BranchSpec, theta: f64) -> Result<Vec<f64>> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Pole { theta, distance: theta.min(PI - theta).max(0.0) });
    }
    let half = (theta / 2.0).sin();
    if half.abs() < POLE_GUARD {
        return Err(Error::Pole { theta, distance: half.abs() });
    }
    let cot_half = (theta / 2.0).cos() / half;
    let k = spec.cores() as f64;
    spec.lengths()
        .iter()
        .zip(spec.counts())
        .map(|(&m, &n)| {
            let s = (m as f64 * theta).sin();
            if s.abs() < POLE_GUARD {
                return Err(Error::Pole { theta, distance: s.abs() });
            }
            let cot = (m as f64 * theta).cos() / s;
            Ok(2.0 * k / n as f64 * cot * cot_half)
        })
        .collect()
}

/// Determinant of `A(θ)`, formed explicitly and reduced by Gaussian
/// elimination with partial pivoting.
pub fn det_a(spec: &BranchSpec, theta: f64) -> Result<f64> {
    let c = cot_terms(spec, theta)?;
    let b = c.len();
    let n: Vec<f64> = spec.counts().iter().map(|&x| x as f64).collect();
    let mut a = vec![0.0; b * b];
    for i in 0..b {
        for j in 0..b {
            a[i * b + j] = if i == j { c[i] - 1.0 } else { -(n[j] / n[i]).sqrt() };
        }
    }
    let mut det = 1.0;
    for col in 0..b {
        let pivot = (col..b)
            .max_by(|&r, &s| a[r * b + col].abs().total_cmp(&a[s * b + col].abs()))
            .unwrap();
        if a[pivot * b + col] == 0.0 {
            return Ok(0.0);
        }
        if pivot != col {
            for j in 0..b {
                a.swap(pivot * b + j, col * b + j);
            }
            det = -det;
        }
        let d = a[col * b + col];
        det *= d;
        for r in (col + 1)..b {
            let f = a[r * b + col] / d;
            for j in col..b {
                a[r * b + j] -= f * a[col * b + j];
            }
        }
    }
    Ok(det)
}

/// `Π c_i − Σ_i Π_{j≠i} c_j`, the rank-one form of `|A(θ)|`.
pub fn det_a_reduced(spec: &BranchSpec, theta: f64) -> Result<f64> {
    let c = cot_terms(spec, theta)?;
    let (det, _) = rank_one_terms(&c);
    Ok(det)
}

/// Returns the rank-one determinant and the sum of the magnitudes of its terms.
fn rank_one_terms(c: &[f64]) -> (f64, f64) {
    let full: f64 = c.iter().product();
    let mut det = full;
    let mut scale = full.abs();
    for i in 0..c.len() {
        let partial: f64 = c.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, x)| x).product();
        det -= partial;
        scale += partial.abs();
    }
    (det, scale)
}

/// `g(θ) = Σ (n_i / 2K) tan(m_i θ) tan(θ/2) − 1`. Infinite or meaningless
/// at the tangent poles; callers must avoid them.
pub fn root_function(spec: &BranchSpec, theta: f64) -> f64 {
    let k = spec.cores() as f64;
    let t_half = (theta / 2.0).tan();
    spec.lengths()
        .iter()
        .zip(spec.counts())
        .map(|(&m, &n)| n as f64 / (2.0 * k) * (m as f64 * theta).tan() * t_half)
        .sum::<f64>()
        - 1.0
}

/// Residual of the scalar forms the root condition takes for one or two
/// branch types, `None` for `B ≥ 3`.
///
/// * `B = 1`: `(n − 2K) cos((m − ½)θ) = (n + 2K) cos((m + ½)θ)`, divided by `n + 2K`.
/// * `B = 2`: `(c₁ − 1)(c₂ − 1) = 1`.
pub fn small_b_residual(spec: &BranchSpec, theta: f64) -> Result<Option<f64>> {
    let k = spec.cores() as f64;
    match spec.branch_types() {
        1 => {
            let m = spec.lengths()[0] as f64;
            let n = spec.counts()[0] as f64;
            let lhs = (n - 2.0 * k) * ((m - 0.5) * theta).cos();
            let rhs = (n + 2.0 * k) * ((m + 0.5) * theta).cos();
            Ok(Some((lhs - rhs).abs() / (n + 2.0 * k)))
        }
        2 => {
            let c = cot_terms(spec, theta)?;
            Ok(Some(((c[0] - 1.0) * (c[1] - 1.0) - 1.0).abs()))
        }
        _ => Ok(None),
    }
}

/// True if `[lo, hi]` contains a pole of some `tan(m_i θ)` or `θ = π`.
fn cell_has_pole(lengths: &[usize], lo: f64, hi: f64) -> bool {
    let slack = 1e-12;
    if hi >= PI - slack {
        return true;
    }
    lengths.iter().any(|&m| {
        let m = m as f64;
        // smallest k with (2k + 1) π / (2m) ≥ lo − slack
        let k = (((lo - slack) * 2.0 * m / PI - 1.0) / 2.0).ceil().max(0.0);
        (2.0 * k + 1.0) * PI / (2.0 * m) <= hi + slack
    })
}

/// Smallest root of `|A(θ)| = 0` in (0, π).
pub fn solve_theta(spec: &BranchSpec) -> Result<ThetaSolution> {
    let lengths = spec.lengths();
    let cells = GRID_PER_LENGTH * spec.max_length();
    let step = PI / cells as f64;
    let mut skipped = 0usize;
    let mut left: Option<(f64, f64)> = None;
    for k in 0..cells {
        let lo = k as f64 * step;
        let hi = (k + 1) as f64 * step;
        if cell_has_pole(lengths, lo, hi) {
            skipped += 1;
            left = None;
            continue;
        }
        let g_lo = match left {
            Some((x, g)) if x == lo => g,
            _ => root_function(spec, lo),
        };
        let g_hi = root_function(spec, hi);
        left = Some((hi, g_hi));
        if g_lo == 0.0 && lo > 0.0 {
            return finish(spec, lo, (lo, hi));
        }
        if g_lo.signum() != g_hi.signum() && g_hi != 0.0 {
            let root = bisect(spec, lo, hi, g_lo);
            return finish(spec, root, (lo, hi));
        }
        if g_hi == 0.0 {
            return finish(spec, hi, (lo, hi));
        }
    }
    Err(Error::RootNotFound(format!(
        "no sign change of g on {cells} cells over (0, π) for {spec} ({skipped} cells skipped at poles)"
    )))
}

/// Bisects until the bracket cannot shrink further, which is well below
/// 1e-13 for roots in (0, π/2).
fn bisect(spec: &BranchSpec, mut lo: f64, mut hi: f64, g_lo: f64) -> f64 {
    let sign_lo = g_lo.signum();
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        let g = root_function(spec, mid);
        if g == 0.0 {
            return mid;
        }
        if g.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

fn finish(spec: &BranchSpec, theta: f64, bracket: (f64, f64)) -> Result<ThetaSolution> {
    let direct = det_a(spec, theta)?;
    let (_, scale) = rank_one_terms(&cot_terms(spec, theta)?);
    let residual = if scale > 0.0 { direct.abs() / scale } else { direct.abs() };
    Ok(ThetaSolution { theta, slem: theta.cos(), residual, bracket })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_path_root() {
        let spec = BranchSpec::new(vec![1], vec![2], 1).unwrap();
        let sol = solve_theta(&spec).unwrap();
        assert!((sol.theta - PI / 3.0).abs() < 1e-13);
        assert!((sol.slem - 0.5).abs() < 1e-13);
        assert!(sol.residual < 1e-12);
        assert!(sol.bracket.0 <= sol.theta && sol.theta <= sol.bracket.1);
    }

    #[test]
    fn three_path_determinant_vanishes_at_pi_over_three() {
        let spec = BranchSpec::new(vec![1], vec![2], 1).unwrap();
        assert!(det_a(&spec, PI / 3.0).unwrap().abs() < 1e-15);
        assert!(det_a_reduced(&spec, PI / 3.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn poles_are_reported() {
        let spec = BranchSpec::new(vec![2], vec![3], 1).unwrap();
        assert!(matches!(det_a(&spec, PI / 2.0), Err(Error::Pole { .. })));
        assert!(matches!(det_a(&spec, 0.0), Err(Error::Pole { .. })));
        assert!(matches!(det_a(&spec, PI), Err(Error::Pole { .. })));
    }

    #[test]
    fn small_theta_blows_up_positive() {
        let spec = BranchSpec::new(vec![1, 2, 3], vec![4, 3, 2], 1).unwrap();
        let c = cot_terms(&spec, 1e-6).unwrap();
        assert!(c.iter().all(|&x| x > 1e9));
        assert!(det_a(&spec, 1e-6).unwrap() > 0.0);
    }

    #[test]
    fn small_b_forms() {
        let one = BranchSpec::new(vec![1], vec![2], 1).unwrap();
        assert!(small_b_residual(&one, PI / 3.0).unwrap().unwrap() < 1e-15);
        let two = BranchSpec::new(vec![2, 5], vec![3, 4], 2).unwrap();
        let sol = solve_theta(&two).unwrap();
        assert!(small_b_residual(&two, sol.theta).unwrap().unwrap() < 1e-10);
        let three = BranchSpec::new(vec![1, 2, 3], vec![1, 1, 1], 1).unwrap();
        assert!(small_b_residual(&three, 0.3).unwrap().is_none());
    }

    #[test]
    fn pole_cells() {
        // tan(2θ) has poles at π/4 and 3π/4
        assert!(cell_has_pole(&[2], 0.78, 0.79));
        assert!(!cell_has_pole(&[2], 0.1, 0.7));
        assert!(cell_has_pole(&[2], PI / 4.0, 0.9));
        assert!(cell_has_pole(&[1], 3.0, PI));
    }
}
