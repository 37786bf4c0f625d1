//! Edge weights: the closed-form optimum and three heuristic baselines.
//!
//! Under optimal weights every edge inside a branch carries 1/2 and the
//! edges into the center(s) carry
//!
//! ```text
//! w1[p] = (1/K) (1 − cos θ) sin(m_p θ) / (sin(m_p θ) − sin((m_p − 1) θ))
//! ```
//!
//! where θ is the smallest root of `|A(θ)| = 0` (see [`solve_theta`]). The
//! resulting SLEM is `cos θ`.

mod baseline;
mod theta;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::topology::{BranchSpec, StarNetwork};
use crate::{Error, Result};

pub use baseline::{best_constant_alpha, best_constant_weights, max_degree_weights, metropolis_weights};
pub use theta::{det_a, det_a_reduced, root_function, small_b_residual, solve_theta, ThetaSolution};

/// Where a set of weights came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Optimal,
    Metropolis,
    MaxDegree,
    BestConstant,
    /// Output of the numerical optimizer.
    Numeric,
    /// Anything supplied by hand.
    Custom,
}

impl Scheme {
    /// The four schemes compared in the consensus simulations.
    pub const COMPARED: [Scheme; 4] = [Scheme::Optimal, Scheme::Metropolis, Scheme::MaxDegree, Scheme::BestConstant];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Optimal => "optimal",
            Scheme::Metropolis => "metropolis",
            Scheme::MaxDegree => "max_degree",
            Scheme::BestConstant => "best_constant",
            Scheme::Numeric => "numeric",
            Scheme::Custom => "custom",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(Scheme::Optimal),
            "metropolis" => Ok(Scheme::Metropolis),
            "max_degree" | "max-degree" => Ok(Scheme::MaxDegree),
            "best_constant" | "best-constant" => Ok(Scheme::BestConstant),
            "numeric" => Ok(Scheme::Numeric),
            "custom" => Ok(Scheme::Custom),
            other => Err(Error::InvalidSpec(format!("unknown weighting scheme `{other}`"))),
        }
    }
}

/// One weight per edge stratum, `strata[p][i]` for branch type `p` and
/// position `i` (`i = 0` is the center edge). Baseline schemes also keep the
/// exact per-edge values in network edge order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratifiedWeights {
    scheme: Scheme,
    strata: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    per_edge: Option<Vec<f64>>,
}

impl StratifiedWeights {
    pub fn new(scheme: Scheme, strata: Vec<Vec<f64>>) -> Self {
        Self { scheme, strata, per_edge: None }
    }

    /// Per-edge weights for `network`; the stratum view takes each stratum's
    /// first edge.
    pub fn from_per_edge(scheme: Scheme, network: &StarNetwork, per_edge: Vec<f64>) -> Self {
        let lengths = network.spec().lengths();
        let mut strata: Vec<Vec<f64>> = lengths.iter().map(|&m| vec![0.0; m]).collect();
        for s in network.edge_strata() {
            if let Some(&e) = s.edges.first() {
                strata[s.id.branch][s.id.position] = per_edge[e];
            }
        }
        Self { scheme, strata, per_edge: Some(per_edge) }
    }

    /// Builds stratum weights from a flat vector in stratum order.
    pub fn from_flat(scheme: Scheme, spec: &BranchSpec, flat: &[f64]) -> Result<Self> {
        if flat.len() != spec.stratum_count() {
            return Err(Error::Coverage(format!(
                "expected {} stratum weights, got {}",
                spec.stratum_count(),
                flat.len()
            )));
        }
        let mut rest = flat;
        let strata = spec
            .lengths()
            .iter()
            .map(|&m| {
                let (head, tail) = rest.split_at(m);
                rest = tail;
                head.to_vec()
            })
            .collect();
        Ok(Self::new(scheme, strata))
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn strata(&self) -> &[Vec<f64>] {
        &self.strata
    }

    pub fn per_edge(&self) -> Option<&[f64]> {
        self.per_edge.as_deref()
    }

    /// Stratum weights concatenated in stratum order.
    pub fn flat(&self) -> Vec<f64> {
        self.strata.iter().flatten().copied().collect()
    }

    /// Center-edge weights `w1[p]`.
    pub fn center_weights(&self) -> Vec<f64> {
        self.strata.iter().map(|w| w[0]).collect()
    }

    /// Copies with the scheme tag replaced and the per-edge map dropped.
    pub fn restricted_to_strata(&self, scheme: Scheme) -> Self {
        Self::new(scheme, self.strata.clone())
    }

    pub(crate) fn check_shape(&self, spec: &BranchSpec) -> Result<()> {
        let lengths = spec.lengths();
        let ok = self.strata.len() == lengths.len()
            && self.strata.iter().zip(lengths).all(|(w, &m)| w.len() == m);
        if ok {
            Ok(())
        } else {
            let shape: Vec<usize> = self.strata.iter().map(Vec::len).collect();
            Err(Error::Coverage(format!("stratum shape {shape:?} does not match branch lengths {lengths:?}")))
        }
    }

    /// One weight per network edge, in edge order.
    pub fn edge_weights(&self, network: &StarNetwork) -> Result<Vec<f64>> {
        if let Some(per_edge) = &self.per_edge {
            if per_edge.len() != network.edges().len() {
                return Err(Error::Coverage(format!(
                    "{} per-edge weights for {} edges",
                    per_edge.len(),
                    network.edges().len()
                )));
            }
            return Ok(per_edge.clone());
        }
        self.check_shape(network.spec())?;
        Ok(network.edges().iter().map(|e| self.strata[e.stratum.branch][e.stratum.position]).collect())
    }

    /// Every weight must lie strictly inside (0, 1).
    pub fn check_range(&self) -> Result<()> {
        let check = |location: String, value: f64| {
            if value > 0.0 && value < 1.0 {
                Ok(())
            } else {
                Err(Error::WeightRange { location, value })
            }
        };
        for (p, ws) in self.strata.iter().enumerate() {
            for (i, &w) in ws.iter().enumerate() {
                check(format!("stratum w[{p}][{i}]"), w)?;
            }
        }
        if let Some(per_edge) = &self.per_edge {
            for (e, &w) in per_edge.iter().enumerate() {
                check(format!("edge {e}"), w)?;
            }
        }
        Ok(())
    }
}

/// Closed-form optimal weights for the θ returned by [`solve_theta`].
pub fn optimal_weights(spec: &BranchSpec, sol: &ThetaSolution) -> Result<StratifiedWeights> {
    let theta = sol.theta;
    let k = spec.cores() as f64;
    let strata = spec
        .lengths()
        .iter()
        .enumerate()
        .map(|(p, &m)| {
            let m = m as f64;
            let top = (m * theta).sin();
            let denom = top - ((m - 1.0) * theta).sin();
            if denom.abs() < 1e-14 {
                return Err(Error::Degenerate {
                    branch: p,
                    reason: format!("sin(mθ) − sin((m−1)θ) = {denom:e}"),
                });
            }
            let w1 = (1.0 - theta.cos()) * top / denom / k;
            if !(w1 > 0.0 && w1 < 1.0) {
                return Err(Error::Degenerate { branch: p, reason: format!("center weight {w1} outside (0, 1)") });
            }
            let mut ws = vec![0.5; m as usize];
            ws[0] = w1;
            Ok(ws)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StratifiedWeights::new(Scheme::Optimal, strata))
}

/// Solves for θ and returns it with the optimal weights.
pub fn closed_form(spec: &BranchSpec) -> Result<(ThetaSolution, StratifiedWeights)> {
    let sol = solve_theta(spec)?;
    let w = optimal_weights(spec, &sol)?;
    Ok((sol, w))
}

/// Weights for `scheme` on `network`. `Numeric` and `Custom` have no rule
/// and are rejected.
pub fn scheme_weights(network: &StarNetwork, scheme: Scheme) -> Result<StratifiedWeights> {
    match scheme {
        Scheme::Optimal => Ok(closed_form(network.spec())?.1),
        Scheme::Metropolis => Ok(metropolis_weights(network)),
        Scheme::MaxDegree => Ok(max_degree_weights(network)),
        Scheme::BestConstant => best_constant_weights(network),
        Scheme::Numeric | Scheme::Custom => {
            Err(Error::InvalidSpec(format!("scheme `{scheme}` has no closed-form weight rule")))
        }
    }
}

/// The eigenvalue `1 − Σ n_p w1[p]` carried by the `K − 1` center modes
/// that are orthogonal to the all-centers direction, compared with `cos θ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReplicaCheck {
    pub cores: usize,
    pub replica_eigenvalue: f64,
    pub slem: f64,
    /// `replica_eigenvalue < slem`.
    pub holds: bool,
}

pub fn replica_condition(spec: &BranchSpec, cores: usize) -> Result<ReplicaCheck> {
    let spec = spec.with_cores(cores)?;
    let (sol, w) = closed_form(&spec)?;
    let replica_eigenvalue =
        1.0 - spec.counts().iter().zip(w.center_weights()).map(|(&n, w1)| n as f64 * w1).sum::<f64>();
    Ok(ReplicaCheck { cores, replica_eigenvalue, slem: sol.slem, holds: replica_eigenvalue < sol.slem })
}

/// Upper bound on the `K` scan; `K_max` is far smaller for any spec whose
/// center weights are not vanishingly small.
const K_SCAN_LIMIT: usize = 1_000_000;

/// Largest number of centers for which the closed form stays optimal: the
/// scan increases `K` from 1 while [`replica_condition`] holds at `K + 1`.
/// The `K` field of `spec` is ignored.
pub fn k_max(spec: &BranchSpec) -> Result<usize> {
    let mut k = 1;
    while k < K_SCAN_LIMIT {
        if !replica_condition(spec, k + 1)?.holds {
            return Ok(k);
        }
        k += 1;
    }
    Err(Error::RootNotFound(format!("K_max scan exceeded {K_SCAN_LIMIT} for {spec}")))
}
