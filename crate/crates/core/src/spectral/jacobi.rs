//! Cyclic Jacobi eigensolver for dense symmetric matrices.

use nalgebra::DMatrix;

use crate::{Error, Result};

const MAX_SWEEPS: usize = 64;
/// Stop once the off-diagonal Frobenius norm drops below this fraction of ‖A‖_F.
const OFF_TOLERANCE: f64 = 1e-14;
/// Rotations on entries below this fraction of ‖A‖_F are skipped.
const SKIP_TOLERANCE: f64 = 1e-18;

/// Relative asymmetry accepted by the solver.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

pub(crate) fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension { expected: a.nrows(), got: a.ncols() });
    }
    let scale = a.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            let gap = (a[(i, j)] - a[(j, i)]).abs();
            if gap > SYMMETRY_TOLERANCE * scale || gap.is_nan() {
                return Err(Error::NotSymmetric { row: i, col: j, gap });
            }
        }
    }
    Ok(())
}

/// Eigenvalues (descending) and, if requested, the matching unit
/// eigenvectors as columns.
pub(crate) fn jacobi(a: &DMatrix<f64>, want_vectors: bool) -> Result<(Vec<f64>, Option<DMatrix<f64>>)> {
    check_symmetric(a)?;
    let n = a.nrows();
    // Work on the symmetrized copy so tiny asymmetries cannot leak in.
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            w[i * n + j] = 0.5 * (a[(i, j)] + a[(j, i)]);
        }
    }
    let mut v = if want_vectors {
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        Some(v)
    } else {
        None
    };

    let fro = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut converged = fro == 0.0 || n < 2;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence(MAX_SWEEPS));
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = w[p * n + q];
                if apq.abs() <= SKIP_TOLERANCE * fro {
                    continue;
                }
                rotated = true;
                let theta = (w[q * n + q] - w[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = w[k * n + p];
                    let akq = w[k * n + q];
                    w[k * n + p] = c * akp - s * akq;
                    w[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = w[p * n + k];
                    let aqk = w[q * n + k];
                    w[p * n + k] = c * apk - s * aqk;
                    w[q * n + k] = s * apk + c * aqk;
                }
                w[p * n + q] = 0.0;
                w[q * n + p] = 0.0;
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        let off = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| w[i * n + j] * w[i * n + j])
            .sum::<f64>()
            .sqrt();
        converged = !rotated || off <= OFF_TOLERANCE * fro;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[j * n + j].total_cmp(&w[i * n + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| w[i * n + i]).collect();
    let vectors = v.map(|v| DMatrix::from_fn(n, n, |row, col| v[row * n + order[col]]));
    Ok((values, vectors))
}
