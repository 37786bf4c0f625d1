//! Stratified block structure of the generic star weight matrix.
//!
//! Under the symmetric change of basis over identical branches, `W` becomes
//! `diag(W₀, W₁, …, W_B)` where each branch block `W_p` appears `n[p] − 1`
//! times and `W₀` couples the center to one symmetric copy of every branch.
//! The change of basis itself is never formed; the blocks are written down
//! directly and checked against the full spectrum.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::eig_sym;
use crate::topology::BranchSpec;
use crate::weights::StratifiedWeights;
use crate::{Error, Result};

/// Slack allowed in the interlacing inequalities.
const INTERLACING_SLACK: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct BlockDecomposition {
    spec: BranchSpec,
    w0: DMatrix<f64>,
    branch_blocks: Vec<DMatrix<f64>>,
}

/// Tridiagonal block of branch type `p`.
fn branch_block(w: &[f64]) -> DMatrix<f64> {
    let mp = w.len();
    let mut block = DMatrix::zeros(mp, mp);
    for j in 0..mp {
        let next = w.get(j + 1).copied().unwrap_or(0.0);
        block[(j, j)] = 1.0 - w[j] - next;
        if j + 1 < mp {
            block[(j, j + 1)] = next;
            block[(j + 1, j)] = next;
        }
    }
    block
}

/// Builds `W₀` and the branch blocks `W_p` for a single-center network.
pub fn build_blocks(spec: &BranchSpec, weights: &StratifiedWeights) -> Result<BlockDecomposition> {
    if spec.cores() != 1 {
        return Err(Error::Precondition(format!(
            "block decomposition is defined for K = 1, got K = {}",
            spec.cores()
        )));
    }
    weights.check_shape(spec)?;
    let strata = weights.strata();
    let branch_blocks: Vec<_> = strata.iter().map(|w| branch_block(w)).collect();

    let dim = 1 + spec.stratum_count();
    let mut w0 = DMatrix::zeros(dim, dim);
    w0[(0, 0)] = 1.0 - spec.counts().iter().zip(strata).map(|(&n, w)| n as f64 * w[0]).sum::<f64>();
    for (p, offset) in spec.length_offsets().into_iter().enumerate() {
        let start = 1 + offset;
        let coupling = (spec.counts()[p] as f64).sqrt() * strata[p][0];
        w0[(0, start)] = coupling;
        w0[(start, 0)] = coupling;
        w0.view_mut((start, start), branch_blocks[p].shape()).copy_from(&branch_blocks[p]);
    }
    Ok(BlockDecomposition { spec: spec.clone(), w0, branch_blocks })
}

impl BlockDecomposition {
    pub fn spec(&self) -> &BranchSpec {
        &self.spec
    }

    /// The coupled block `W₀` of size `1 + M_B`.
    pub fn w0(&self) -> &DMatrix<f64> {
        &self.w0
    }

    /// `W₀′ = diag(W₁, …, W_B)`, the trailing principal submatrix of `W₀`.
    pub fn w0_prime(&self) -> DMatrix<f64> {
        let d = self.w0.nrows() - 1;
        self.w0.view((1, 1), (d, d)).into_owned()
    }

    pub fn branch_blocks(&self) -> &[DMatrix<f64>] {
        &self.branch_blocks
    }

    /// Eigenvalues of `W₀` together with `n[p] − 1` copies of the
    /// eigenvalues of each `W_p`, descending. Equals the spectrum of `W`.
    pub fn block_spectrum(&self) -> Result<Vec<f64>> {
        let mut all = eig_sym(&self.w0)?;
        for (block, &np) in self.branch_blocks.iter().zip(self.spec.counts()) {
            let vals = eig_sym(block)?;
            for _ in 1..np {
                all.extend_from_slice(&vals);
            }
        }
        all.sort_by(|a, b| b.total_cmp(a));
        Ok(all)
    }

    /// Unit eigenvector of `W₀` for eigenvalue one: the image of the
    /// all-ones vector in the stratified basis.
    pub fn consensus_vector(&self) -> DVector<f64> {
        let spec = &self.spec;
        let mut v = DVector::zeros(self.w0.nrows());
        v[0] = 1.0;
        for (p, offset) in spec.length_offsets().into_iter().enumerate() {
            let root = (spec.counts()[p] as f64).sqrt();
            for j in 0..spec.lengths()[p] {
                v[1 + offset + j] = root;
            }
        }
        v / (spec.node_count() as f64).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterlacingReport {
    pub holds: bool,
    /// First index `j` (ascending order) where an inequality fails.
    pub violation: Option<usize>,
    pub lambda1_w0: f64,
    pub lambda2_w0: f64,
    pub lambda_min_w0: f64,
    pub lambda1_w0_prime: f64,
}

impl InterlacingReport {
    /// Largest deviation of `λ₁(W₀′)`, `|λ₂(W₀)|` and `−λ_min(W₀)` from `target`.
    pub fn modulus_gap(&self, target: f64) -> f64 {
        [self.lambda1_w0_prime, self.lambda2_w0.abs(), -self.lambda_min_w0]
            .iter()
            .map(|x| (x - target).abs())
            .fold(0.0, f64::max)
    }
}

/// Cauchy interlacing between `W₀` and its principal submatrix `W₀′`:
/// `λ_j(W₀) ≤ λ_j(W₀′) ≤ λ_{j+1}(W₀)` in ascending order.
///
/// Only meaningful for the consensus problem when every `n[p] ≥ 2`; other
/// specs are rejected with [`Error::Precondition`].
pub fn interlacing_check(decomp: &BlockDecomposition) -> Result<InterlacingReport> {
    if decomp.spec.has_singleton_branch() {
        return Err(Error::Precondition("n_p ≥ 2 required".into()));
    }
    let mut outer = eig_sym(&decomp.w0)?;
    let mut inner = eig_sym(&decomp.w0_prime())?;
    outer.reverse();
    inner.reverse();
    let violation = inner.iter().enumerate().position(|(j, &mu)| {
        outer[j] > mu + INTERLACING_SLACK || mu > outer[j + 1] + INTERLACING_SLACK
    });
    let top = outer.len() - 1;
    Ok(InterlacingReport {
        holds: violation.is_none(),
        violation,
        lambda1_w0: outer[top],
        lambda2_w0: outer[top - 1],
        lambda_min_w0: outer[0],
        lambda1_w0_prime: inner[inner.len() - 1],
    })
}

/// Rank-one generators: `W₀′ = I − Σ w α αᵀ` and `W₀ = I − Σ w β βᵀ`.
#[derive(Clone, Debug)]
pub struct AlphaBeta {
    /// `alpha[p][i]`, length `M_B`.
    pub alpha: Vec<Vec<DVector<f64>>>,
    /// `beta[p][i]`, length `1 + M_B`.
    pub beta: Vec<Vec<DVector<f64>>>,
}

pub fn build_alpha_beta(spec: &BranchSpec) -> Result<AlphaBeta> {
    if spec.cores() != 1 {
        return Err(Error::Precondition(format!(
            "rank-one expansion is defined for K = 1, got K = {}",
            spec.cores()
        )));
    }
    let total = spec.stratum_count();
    let mut alpha = Vec::with_capacity(spec.branch_types());
    let mut beta = Vec::with_capacity(spec.branch_types());
    for (p, offset) in spec.length_offsets().into_iter().enumerate() {
        let mp = spec.lengths()[p];
        let mut a_p = Vec::with_capacity(mp);
        let mut b_p = Vec::with_capacity(mp);

        let mut a = DVector::zeros(total);
        a[offset] = 1.0;
        a_p.push(a);
        let mut b = DVector::zeros(total + 1);
        b[0] = -(spec.counts()[p] as f64).sqrt();
        b[1 + offset] = 1.0;
        b_p.push(b);

        for i in 1..mp {
            let mut a = DVector::zeros(total);
            a[offset + i - 1] = -1.0;
            a[offset + i] = 1.0;
            a_p.push(a);
            let mut b = DVector::zeros(total + 1);
            b[offset + i] = -1.0;
            b[offset + i + 1] = 1.0;
            b_p.push(b);
        }
        alpha.push(a_p);
        beta.push(b_p);
    }
    Ok(AlphaBeta { alpha, beta })
}

impl AlphaBeta {
    fn expand(vectors: &[Vec<DVector<f64>>], weights: &StratifiedWeights) -> DMatrix<f64> {
        let dim = vectors[0][0].len();
        let mut m = DMatrix::identity(dim, dim);
        for (vs, ws) in vectors.iter().zip(weights.strata()) {
            for (v, &w) in vs.iter().zip(ws) {
                m -= w * v * v.transpose();
            }
        }
        m
    }

    pub fn reconstruct_w0_prime(&self, weights: &StratifiedWeights) -> DMatrix<f64> {
        Self::expand(&self.alpha, weights)
    }

    pub fn reconstruct_w0(&self, weights: &StratifiedWeights) -> DMatrix<f64> {
        Self::expand(&self.beta, weights)
    }
}
