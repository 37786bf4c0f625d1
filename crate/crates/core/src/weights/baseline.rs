//! Heuristic weightings used as baselines.

use super::{Scheme, StratifiedWeights};
use crate::spectral::{eig_sym, laplacian};
use crate::topology::StarNetwork;
use crate::Result;

/// `w_ij = 1 / (1 + max(d_i, d_j))`.
pub fn metropolis_weights(network: &StarNetwork) -> StratifiedWeights {
    let d = network.degrees();
    let per_edge = network
        .edges()
        .iter()
        .map(|e| 1.0 / (1 + d[e.a].max(d[e.b])) as f64)
        .collect();
    StratifiedWeights::from_per_edge(Scheme::Metropolis, network, per_edge)
}

/// `w_ij = 1 / max_k d_k` on every edge.
pub fn max_degree_weights(network: &StarNetwork) -> StratifiedWeights {
    let w = 1.0 / network.max_degree() as f64;
    StratifiedWeights::from_per_edge(Scheme::MaxDegree, network, vec![w; network.edges().len()])
}

/// The constant `α* = 2 / (λ₁(L) + λ_{N−1}(L))` on every edge, with `L = D − A`.
pub fn best_constant_alpha(network: &StarNetwork) -> Result<f64> {
    let vals = eig_sym(&laplacian(network))?;
    let n = vals.len();
    let second_smallest = if n >= 2 { vals[n - 2] } else { vals[0] };
    Ok(2.0 / (vals[0] + second_smallest))
}

pub fn best_constant_weights(network: &StarNetwork) -> Result<StratifiedWeights> {
    let alpha = best_constant_alpha(network)?;
    Ok(StratifiedWeights::from_per_edge(
        Scheme::BestConstant,
        network,
        vec![alpha; network.edges().len()],
    ))
}
