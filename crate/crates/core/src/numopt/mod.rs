//! Direct numerical minimization of the SLEM over stratified weights.
//!
//! The objective `f(w) = max(λ₂(W), −λ_N(W)) = ‖W(w) − 11ᵀ/N‖₂` is convex in
//! the stratum weights because `W` is affine in them. It is minimized in two
//! phases that never consult the closed form:
//!
//! 1. projected subgradient descent with step `c/√t`, keeping the best
//!    iterate, and
//! 2. a log-barrier Newton polish of the equivalent semidefinite program
//!    `min s  s.t.  −sI ⪯ W(w) − J ⪯ sI`, started from the phase-1 point.
//!
//! Phase 1 alone reaches the optimal value to roughly 1e-4, but the optimum
//! is flat along the interior branch weights, so the weights themselves need
//! phase 2 to settle.

mod barrier;

use nalgebra::DMatrix;

use crate::spectral::eigh;
use crate::topology::StarNetwork;
use crate::weights::{metropolis_weights, Scheme, StratifiedWeights};
use crate::{Error, Result};

pub use barrier::BarrierOutcome;

/// Default accuracy target; the barrier gap certificate reaches it on
/// networks of a few hundred edges before rounding takes over.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    /// Target accuracy on the objective.
    pub tol: f64,
    pub subgradient_iterations: usize,
    /// `c` in the step size `c / √t`.
    pub step_scale: f64,
    pub lower: f64,
    pub upper: f64,
    /// `λ₂` and `−λ_N` closer than this are treated as tied.
    pub tie_tolerance: f64,
    /// Subgradient stops early if the best value improved by less than
    /// `tol` over this many iterations.
    pub window: usize,
    pub polish: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            subgradient_iterations: 5000,
            step_scale: 0.1,
            lower: 1e-6,
            upper: 1.0 - 1e-6,
            tie_tolerance: 1e-9,
            window: 500,
            polish: true,
        }
    }
}

impl OptimizerConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Clone, Debug)]
pub struct OptimizationResult {
    pub weights: StratifiedWeights,
    /// Objective at `weights`; the minimum over every evaluated iterate.
    pub slem: f64,
    /// Subgradient steps plus Newton steps.
    pub iterations: usize,
    pub subgradient_iterations: usize,
    pub newton_iterations: usize,
    pub converged: bool,
    /// Last subgradient step length `c / √t`.
    pub final_step: f64,
    /// Barrier bound on `slem − f*`, when the polish ran.
    pub gap_bound: Option<f64>,
    /// Objective at every evaluated iterate, in visiting order.
    pub history: Vec<f64>,
}

/// Extreme eigenvalues of `W − J` with their subgradients over the strata.
#[derive(Clone, Debug)]
pub struct SpectralExtremes {
    /// `λ_max(W − J)`, which is `λ₂(W)` whenever `λ₂ ≥ 0`.
    pub top: f64,
    /// `λ_min(W − J) = λ_N(W)`.
    pub bottom: f64,
    /// Gradient of `top` (valid where it is simple).
    pub grad_top: Vec<f64>,
    /// Gradient of `bottom`.
    pub grad_bottom: Vec<f64>,
}

impl SpectralExtremes {
    pub fn objective(&self) -> f64 {
        self.top.max(-self.bottom)
    }
}

/// Stratum index of every edge.
pub(crate) fn edge_strata(network: &StarNetwork) -> Vec<usize> {
    network.edges().iter().map(|e| network.stratum_index(e.stratum)).collect()
}

/// `W(w) − 11ᵀ/N` for flat stratum weights.
pub(crate) fn centered_matrix(network: &StarNetwork, strata_of_edge: &[usize], flat: &[f64]) -> DMatrix<f64> {
    let n = network.node_count();
    let mut m = DMatrix::from_element(n, n, -1.0 / n as f64);
    for i in 0..n {
        m[(i, i)] += 1.0;
    }
    for (e, &s) in network.edges().iter().zip(strata_of_edge) {
        let w = flat[s];
        m[(e.a, e.b)] += w;
        m[(e.b, e.a)] += w;
        m[(e.a, e.a)] -= w;
        m[(e.b, e.b)] -= w;
    }
    m
}

fn check_flat(network: &StarNetwork, flat: &[f64]) -> Result<()> {
    let expected = network.spec().stratum_count();
    if flat.len() != expected {
        return Err(Error::Dimension { expected, got: flat.len() });
    }
    Ok(())
}

pub fn spectral_extremes(network: &StarNetwork, flat: &[f64]) -> Result<SpectralExtremes> {
    check_flat(network, flat)?;
    let strata_of_edge = edge_strata(network);
    extremes_with(network, &strata_of_edge, flat)
}

fn extremes_with(network: &StarNetwork, strata_of_edge: &[usize], flat: &[f64]) -> Result<SpectralExtremes> {
    let m = centered_matrix(network, strata_of_edge, flat);
    let (vals, vecs) = eigh(&m)?;
    let n = vals.len();
    let d = flat.len();
    let mut grad_top = vec![0.0; d];
    let mut grad_bottom = vec![0.0; d];
    let u_top = vecs.column(0);
    let u_bottom = vecs.column(n - 1);
    // dW/dw_s = −Σ_{e∈s} (e_a − e_b)(e_a − e_b)ᵀ
    for (e, &s) in network.edges().iter().zip(strata_of_edge) {
        let dt = u_top[e.a] - u_top[e.b];
        let db = u_bottom[e.a] - u_bottom[e.b];
        grad_top[s] -= dt * dt;
        grad_bottom[s] -= db * db;
    }
    Ok(SpectralExtremes { top: vals[0], bottom: vals[n - 1], grad_top, grad_bottom })
}

/// `max(λ₂, −λ_N)` for flat stratum weights.
pub fn objective(network: &StarNetwork, flat: &[f64]) -> Result<f64> {
    check_flat(network, flat)?;
    let m = centered_matrix(network, &edge_strata(network), flat);
    let vals = crate::spectral::eig_sym(&m)?;
    Ok(vals[0].max(-vals[vals.len() - 1]))
}

/// A subgradient of the objective: the gradient of the active extreme
/// eigenvalue, or the average of both when they tie.
pub fn subgradient(ext: &SpectralExtremes, tie_tolerance: f64) -> Vec<f64> {
    let gap = ext.top - (-ext.bottom);
    if gap.abs() <= tie_tolerance {
        ext.grad_top.iter().zip(&ext.grad_bottom).map(|(t, b)| 0.5 * (t - b)).collect()
    } else if gap > 0.0 {
        ext.grad_top.clone()
    } else {
        ext.grad_bottom.iter().map(|b| -b).collect()
    }
}

/// Metropolis weights restricted to strata: the default starting point.
pub fn default_init(network: &StarNetwork) -> StratifiedWeights {
    metropolis_weights(network).restricted_to_strata(Scheme::Custom)
}

pub fn optimize_weights(network: &StarNetwork, init: &StratifiedWeights, tol: f64) -> Result<OptimizationResult> {
    optimize_weights_with(network, init, &OptimizerConfig::with_tol(tol))
}

pub fn optimize_weights_with(
    network: &StarNetwork,
    init: &StratifiedWeights,
    config: &OptimizerConfig,
) -> Result<OptimizationResult> {
    if !(config.tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {}", config.tol)));
    }
    let spec = network.spec();
    let mut w = init.flat();
    check_flat(network, &w)?;
    if let Some(bad) = w.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
        return Err(Error::WeightRange { location: "initial weights".into(), value: *bad });
    }
    let strata_of_edge = edge_strata(network);

    let mut history = Vec::with_capacity(config.subgradient_iterations + 16);
    let mut best_w = w.clone();
    let mut best = f64::INFINITY;
    let mut window_start_best = f64::INFINITY;
    let mut final_step = 0.0;
    let mut sub_iters = 0;
    let mut window_converged = false;

    for t in 1..=config.subgradient_iterations {
        let ext = extremes_with(network, &strata_of_edge, &w)?;
        let f = ext.objective();
        history.push(f);
        if f < best {
            best = f;
            best_w.clone_from(&w);
        }
        sub_iters = t;
        if t % config.window == 0 {
            if window_start_best - best < config.tol {
                window_converged = true;
                break;
            }
            window_start_best = best;
        }
        let g = subgradient(&ext, config.tie_tolerance);
        final_step = config.step_scale / (t as f64).sqrt();
        for (x, gi) in w.iter_mut().zip(&g) {
            *x = (*x - final_step * gi).clamp(config.lower, config.upper);
        }
    }
    if sub_iters == 0 {
        best = objective(network, &w)?;
        history.push(best);
    }

    let mut newton_iterations = 0;
    let mut gap_bound = None;
    let mut converged = window_converged;
    if config.polish {
        let outcome = barrier::polish(network, &strata_of_edge, &best_w, config)?;
        newton_iterations = outcome.newton_iterations;
        for (f, point) in outcome.checkpoints {
            history.push(f);
            if f < best {
                best = f;
                best_w = point;
            }
        }
        gap_bound = Some(outcome.gap_bound);
        converged = outcome.gap_bound <= config.tol;
    }

    Ok(OptimizationResult {
        weights: StratifiedWeights::from_flat(Scheme::Numeric, spec, &best_w)?,
        slem: best,
        iterations: sub_iters + newton_iterations,
        subgradient_iterations: sub_iters,
        newton_iterations,
        converged,
        final_step,
        gap_bound,
        history,
    })
}
