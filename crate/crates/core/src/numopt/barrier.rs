//! Log-barrier Newton method for `min s  s.t.  −sI ⪯ W(w) − J ⪯ sI`,
//! `lower < w < upper`.
//!
//! With `M = W − J`, `F₊ = sI − M` and `F₋ = sI + M`, the centering problem is
//! `t·s − log|F₊| − log|F₋| − Σ log(w − lower) − Σ log(upper − w)`.
//! `∂M/∂w_i = −L_i` where `L_i = Σ_{e∈i} d_e d_eᵀ`, so every derivative
//! reduces to the bilinear forms `d_eᵀ F⁻¹ d_f`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{centered_matrix, OptimizerConfig};
use crate::spectral::eig_sym;
use crate::topology::StarNetwork;
use crate::{Error, Result};

const GROWTH: f64 = 10.0;
const INITIAL_GAP: f64 = 1e-2;
const MAX_OUTER: usize = 40;
const MAX_CENTERING: usize = 200;
const DECREMENT_TOL: f64 = 1e-9;
const STALL_DECREMENT: f64 = 1e-6;
const ARMIJO: f64 = 0.25;

#[derive(Clone, Debug)]
pub struct BarrierOutcome {
    pub newton_iterations: usize,
    /// `m / t` at the last completed centering, `m = 2N + 2d`.
    pub gap_bound: f64,
    /// Objective and weights after each centering.
    pub checkpoints: Vec<(f64, Vec<f64>)>,
}

struct Problem<'a> {
    network: &'a StarNetwork,
    strata_of_edge: &'a [usize],
    lower: f64,
    upper: f64,
    n: usize,
    d: usize,
}

struct Factors {
    plus: Cholesky<f64, Dyn>,
    minus: Cholesky<f64, Dyn>,
}

fn log_det(ch: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * ch.l_dirty().diagonal().iter().map(|x| x.ln()).sum::<f64>()
}

impl Problem<'_> {
    fn factor(&self, w: &[f64], s: f64) -> Option<Factors> {
        if w.iter().any(|&x| !(x > self.lower && x < self.upper)) {
            return None;
        }
        let m = centered_matrix(self.network, self.strata_of_edge, w);
        let eye = DMatrix::<f64>::identity(self.n, self.n) * s;
        let plus = Cholesky::new(&eye - &m)?;
        let minus = Cholesky::new(&eye + &m)?;
        Some(Factors { plus, minus })
    }

    /// Barrier part of the centering objective (everything except `t·s`).
    fn barrier(&self, f: &Factors, w: &[f64]) -> f64 {
        let boxed: f64 = w.iter().map(|&x| (x - self.lower).ln() + (self.upper - x).ln()).sum();
        -log_det(&f.plus) - log_det(&f.minus) - boxed
    }

    /// Gradient and Hessian of the centering objective over `(w, s)`.
    fn derivatives(&self, f: &Factors, w: &[f64], t: f64) -> (DVector<f64>, DMatrix<f64>) {
        let d = self.d;
        let edges = self.network.edges();
        let mut grad = DVector::zeros(d + 1);
        let mut hess = DMatrix::zeros(d + 1, d + 1);
        grad[d] = t;
        for (g, sign) in [(f.plus.inverse(), 1.0), (f.minus.inverse(), -1.0)] {
            let q = |e: usize, h: usize| {
                let (a, b) = (edges[e].a, edges[e].b);
                let (c, k) = (edges[h].a, edges[h].b);
                g[(a, c)] - g[(a, k)] - g[(b, c)] + g[(b, k)]
            };
            for e in 0..edges.len() {
                let se = self.strata_of_edge[e];
                grad[se] -= sign * q(e, e);
                for h in 0..=e {
                    let v = q(e, h);
                    let sh = self.strata_of_edge[h];
                    let v2 = v * v;
                    hess[(se, sh)] += v2;
                    if h != e {
                        hess[(sh, se)] += v2;
                    }
                }
                // d_eᵀ G² d_e
                let (a, b) = (edges[e].a, edges[e].b);
                let col: f64 = (0..self.n).map(|r| (g[(r, a)] - g[(r, b)]).powi(2)).sum();
                hess[(se, d)] += sign * col;
                hess[(d, se)] += sign * col;
            }
            grad[d] -= g.trace();
            hess[(d, d)] += g.iter().map(|x| x * x).sum::<f64>();
        }
        for (i, &x) in w.iter().enumerate() {
            let lo = x - self.lower;
            let hi = self.upper - x;
            grad[i] += -1.0 / lo + 1.0 / hi;
            hess[(i, i)] += 1.0 / (lo * lo) + 1.0 / (hi * hi);
        }
        (grad, hess)
    }
}

/// Solves `H Δ = −g` after symmetric diagonal scaling of `H`, which
/// spans many orders of magnitude between the weight and `s` coordinates.
fn solve_newton(mut hess: DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
    let scale: DVector<f64> = hess.diagonal().map(|h| if h > 0.0 { 1.0 / h.sqrt() } else { 1.0 });
    let n = scale.len();
    for i in 0..n {
        for j in 0..n {
            hess[(i, j)] *= scale[i] * scale[j];
        }
    }
    let rhs = -grad.component_mul(&scale);
    let y = match Cholesky::new(hess.clone()) {
        Some(ch) => ch.solve(&rhs),
        None => hess.lu().solve(&rhs)?,
    };
    Some(y.component_mul(&scale))
}

fn eval_objective(p: &Problem<'_>, w: &[f64]) -> Result<f64> {
    let vals = eig_sym(&centered_matrix(p.network, p.strata_of_edge, w))?;
    Ok(vals[0].max(-vals[vals.len() - 1]))
}

pub(super) fn polish(
    network: &StarNetwork,
    strata_of_edge: &[usize],
    start: &[f64],
    config: &OptimizerConfig,
) -> Result<BarrierOutcome> {
    let d = start.len();
    let n = network.node_count();
    let p = Problem { network, strata_of_edge, lower: config.lower, upper: config.upper, n, d };
    let margin = 1e-4 * (config.upper - config.lower);
    let mut w: Vec<f64> = start
        .iter()
        .map(|&x| x.clamp(config.lower + margin, config.upper - margin))
        .collect();
    let mut s = eval_objective(&p, &w)? + INITIAL_GAP;
    let mut factors = p.factor(&w, s).ok_or_else(|| {
        Error::Precondition("barrier start point is not strictly feasible".into())
    })?;

    let m_total = (2 * n + 2 * d) as f64;
    let mut t = m_total / INITIAL_GAP;
    let mut newton_iterations = 0;
    let mut checkpoints = Vec::new();
    let mut gap_bound = f64::INFINITY;

    for _ in 0..MAX_OUTER {
        let mut centered = false;
        let mut stalled = false;
        for _ in 0..MAX_CENTERING {
            let (grad, hess) = p.derivatives(&factors, &w, t);
            let Some(step) = solve_newton(hess, &grad) else {
                stalled = true;
                break;
            };
            let slope = grad.dot(&step);
            newton_iterations += 1;
            if -slope / 2.0 <= DECREMENT_TOL {
                centered = true;
                break;
            }
            let base = p.barrier(&factors, &w);
            let mut alpha = 1.0;
            let mut accepted = None;
            while alpha > 1e-14 {
                let trial: Vec<f64> = w.iter().zip(step.iter()).map(|(x, dx)| x + alpha * dx).collect();
                let trial_s = s + alpha * step[d];
                if let Some(f) = p.factor(&trial, trial_s) {
                    let change = t * alpha * step[d] + p.barrier(&f, &trial) - base;
                    if change <= ARMIJO * alpha * slope {
                        accepted = Some((trial, trial_s, f));
                        break;
                    }
                }
                alpha *= 0.5;
            }
            let Some((trial, trial_s, f)) = accepted else {
                // at working precision a tiny decrement is as good as centered
                centered = -slope / 2.0 <= STALL_DECREMENT;
                stalled = !centered;
                break;
            };
            w = trial;
            s = trial_s;
            factors = f;
        }
        checkpoints.push((eval_objective(&p, &w)?, w.clone()));
        if centered {
            gap_bound = m_total / t;
        }
        if stalled || gap_bound <= config.tol {
            break;
        }
        t *= GROWTH;
    }

    Ok(BarrierOutcome { newton_iterations, gap_bound, checkpoints })
}
