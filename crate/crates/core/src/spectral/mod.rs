//! Weight matrices and their spectra.
//!
//! The SLEM of a symmetric row-stochastic `W` is `max(λ₂, −λ_N)`; it sets
//! the asymptotic rate of the consensus iteration. [`blocks`] holds the
//! stratified block structure of the generic star weight matrix.

mod blocks;
mod jacobi;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::topology::StarNetwork;
use crate::weights::StratifiedWeights;
use crate::{Error, Result};

pub use blocks::{
    build_alpha_beta, build_blocks, interlacing_check, AlphaBeta, BlockDecomposition, InterlacingReport,
};
pub use jacobi::SYMMETRY_TOLERANCE;

/// Eigenvalues within this distance of one count toward its multiplicity.
const UNIT_EIGEN_TOLERANCE: f64 = 1e-9;
/// Row sums of a weight matrix must be within this of one.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// A symmetric, row-stochastic consensus matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix {
    matrix: DMatrix<f64>,
}

impl WeightMatrix {
    /// Wraps a dense matrix after checking symmetry and row sums.
    pub fn from_dense(matrix: DMatrix<f64>) -> Result<Self> {
        jacobi::check_symmetric(&matrix)?;
        for (i, row) in matrix.row_iter().enumerate() {
            let err = (row.sum() - 1.0).abs();
            if err > 1e-10 {
                return Err(Error::Coverage(format!("row {i} sums to 1 {:+e}", row.sum() - 1.0)));
            }
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Largest `|Σ_j W_ij − 1|` over rows.
    pub fn row_sum_error(&self) -> f64 {
        self.matrix.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Largest `|W_ij − W_ji|`.
    pub fn asymmetry(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }
}

/// Builds `W` from per-stratum or per-edge weights. Off-diagonal entries sit
/// on edges only; the diagonal makes every row sum to one.
pub fn assemble_weight_matrix(network: &StarNetwork, weights: &StratifiedWeights) -> Result<WeightMatrix> {
    let edge_weights = weights.edge_weights(network)?;
    let n = network.node_count();
    let mut m = DMatrix::zeros(n, n);
    for (e, &w) in network.edges().iter().zip(&edge_weights) {
        m[(e.a, e.b)] = w;
        m[(e.b, e.a)] = w;
    }
    for i in 0..n {
        let off: f64 = m.row(i).sum();
        m[(i, i)] = 1.0 - off;
    }
    Ok(WeightMatrix { matrix: m })
}

/// All eigenvalues of a symmetric matrix, descending.
pub fn eig_sym(matrix: &DMatrix<f64>) -> Result<Vec<f64>> {
    Ok(jacobi::jacobi(matrix, false)?.0)
}

/// Eigenvalues (descending) with unit eigenvectors as matching columns.
pub fn eigh(matrix: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let (values, vectors) = jacobi::jacobi(matrix, true)?;
    Ok((values, vectors.expect("vectors requested")))
}

/// `max(λ₂, −λ_N)` of a descending eigenvalue list.
pub fn slem_of_eigenvalues(eigenvalues: &[f64]) -> f64 {
    match eigenvalues {
        [] | [_] => 0.0,
        [_, rest @ ..] => rest[0].max(-rest[rest.len() - 1]),
    }
}

pub fn slem(matrix: &WeightMatrix) -> Result<f64> {
    Ok(slem_of_eigenvalues(&eig_sym(matrix.matrix())?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub slem: f64,
    pub lambda2: f64,
    pub lambda_min: f64,
    /// Number of eigenvalues within 1e-9 of one.
    pub unit_multiplicity: usize,
}

impl SpectralReport {
    pub fn from_eigenvalues(eigenvalues: Vec<f64>) -> Self {
        let slem = slem_of_eigenvalues(&eigenvalues);
        let lambda2 = eigenvalues.get(1).copied().unwrap_or(f64::NAN);
        let lambda_min = eigenvalues.last().copied().unwrap_or(f64::NAN);
        let unit_multiplicity =
            eigenvalues.iter().filter(|&&l| (l - 1.0).abs() <= UNIT_EIGEN_TOLERANCE).count();
        Self { eigenvalues, slem, lambda2, lambda_min, unit_multiplicity }
    }

    /// Convergence conditions for `x(t+1) = W x(t)`: one is a simple
    /// eigenvalue on top and every other eigenvalue has modulus below one.
    pub fn converges(&self) -> bool {
        self.eigenvalues.first().is_some_and(|l| (l - 1.0).abs() <= 1e-10)
            && self.unit_multiplicity == 1
            && self.slem < 1.0
    }
}

pub fn spectral_report(matrix: &WeightMatrix) -> Result<SpectralReport> {
    Ok(SpectralReport::from_eigenvalues(eig_sym(matrix.matrix())?))
}

/// Unnormalized graph Laplacian `L = D − A`.
pub fn laplacian(network: &StarNetwork) -> DMatrix<f64> {
    let n = network.node_count();
    let mut l = DMatrix::zeros(n, n);
    for e in network.edges() {
        l[(e.a, e.b)] -= 1.0;
        l[(e.b, e.a)] -= 1.0;
        l[(e.a, e.a)] += 1.0;
        l[(e.b, e.b)] += 1.0;
    }
    l
}

/// Compares two eigenvalue multisets by sorted matching. Returns the largest
/// pairwise deviation, or `None` if the sizes differ.
pub fn spectrum_distance(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    Some(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// `W·x`.
pub fn apply(matrix: &WeightMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != matrix.dim() {
        return Err(Error::Dimension { expected: matrix.dim(), got: x.len() });
    }
    let v = matrix.matrix() * DVector::from_column_slice(x);
    Ok(v.as_slice().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_network, BranchSpec};
    use crate::weights::{Scheme, StratifiedWeights};

    fn three_path_optimal() -> WeightMatrix {
        let net = build_network(&BranchSpec::new(vec![1], vec![2], 1).unwrap());
        let w = StratifiedWeights::new(Scheme::Optimal, vec![vec![0.5]]);
        assemble_weight_matrix(&net, &w).unwrap()
    }

    #[test]
    fn three_path_matrix_entries() {
        // node order is (center, tip, tip)
        let w = three_path_optimal();
        let expected = DMatrix::from_row_slice(3, 3, &[0.0, 0.5, 0.5, 0.5, 0.5, 0.0, 0.5, 0.0, 0.5]);
        assert_eq!(w.matrix(), &expected);
    }

    #[test]
    fn three_path_spectrum() {
        let report = spectral_report(&three_path_optimal()).unwrap();
        let expected = [1.0, 0.5, -0.5];
        for (got, want) in report.eigenvalues.iter().zip(expected) {
            assert!((got - want).abs() < 1e-14, "{got} vs {want}");
        }
        assert!((report.slem - 0.5).abs() < 1e-14);
        assert!(report.converges());
    }

    #[test]
    fn coverage_mismatch_is_rejected() {
        let net = build_network(&BranchSpec::new(vec![1, 2], vec![2, 2], 1).unwrap());
        let w = StratifiedWeights::new(Scheme::Optimal, vec![vec![0.5]]);
        assert!(matches!(assemble_weight_matrix(&net, &w), Err(Error::Coverage(_))));
    }

    #[test]
    fn slem_of_short_lists() {
        assert_eq!(slem_of_eigenvalues(&[]), 0.0);
        assert_eq!(slem_of_eigenvalues(&[1.0, -0.9]), 0.9);
        assert_eq!(slem_of_eigenvalues(&[1.0, 0.7, 0.1, -0.2]), 0.7);
    }

    #[test]
    fn apply_checks_dimension() {
        let w = three_path_optimal();
        assert!(matches!(apply(&w, &[1.0, 2.0]), Err(Error::Dimension { expected: 3, got: 2 })));
        assert_eq!(apply(&w, &[0.0, 1.0, 0.0]).unwrap(), vec![0.5, 0.5, 0.0]);
    }

    #[test]
    fn from_dense_rejects_non_stochastic() {
        let m = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.4]);
        assert!(WeightMatrix::from_dense(m).is_err());
    }
}
