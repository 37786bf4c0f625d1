//! Monte Carlo runs of the consensus iteration `x(t+1) = W x(t)`.
//!
//! Each trial tracks the deviation `y = x − x̄1` rather than `x`. The two are
//! the same iteration because `W1 = 1`, but `y` keeps full relative
//! precision after the error has dropped below the rounding level of `x̄`.
//! The mean of `y` is projected out after every step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::spectral::{apply, slem, WeightMatrix};
use crate::{Error, Result};

/// Trials reduced together; fixed so the summation order never depends on
/// the thread count.
const CHUNK: usize = 64;
const MIN_SPREAD: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub trials: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Keep every trial's error curve.
    pub keep_trials: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self { trials: 10_000, iterations: 500, seed: 0, keep_trials: false }
    }
}

impl SimulationConfig {
    pub fn new(trials: usize, iterations: usize, seed: u64) -> Result<Self> {
        let config = Self { trials, iterations, seed, keep_trials: false };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidSpec("trials must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    /// Mean over trials of `‖x(t) − x̄1‖ / ‖x(0) − x̄1‖`, for t = 0..=iterations.
    pub mean_error: Vec<f64>,
    /// `mean_error[t + 1] / mean_error[t]`.
    pub decay: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_trial: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ConvergenceTrace {
    /// Least-squares slope of `ln e(t)` over the last third of the trace.
    pub fn fitted_slope(&self) -> Option<f64> {
        let n = self.mean_error.len();
        fit_log_slope(&self.mean_error, n - n / 3)
    }
}

/// Least-squares slope of `ln e(t)` against `t` for `t ≥ from`. `None` if
/// fewer than two usable points remain.
pub fn fit_log_slope(errors: &[f64], from: usize) -> Option<f64> {
    let pts: Vec<(f64, f64)> = errors
        .iter()
        .enumerate()
        .skip(from)
        .filter(|(_, &e)| e > 0.0 && e.is_finite())
        .map(|(t, &e)| (t as f64, e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// One step of the iteration: `W x`.
pub fn consensus_step(matrix: &WeightMatrix, state: &[f64]) -> Result<Vec<f64>> {
    apply(matrix, state)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn center(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

fn initial_deviation(n: usize, seed: u64, trial: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ trial as u64);
    loop {
        let mut y: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        center(&mut y);
        if norm(&y) >= MIN_SPREAD {
            return y;
        }
    }
}

fn run_one(rows: &[f64], n: usize, config: &SimulationConfig, trial: usize) -> Vec<f64> {
    let mut y = initial_deviation(n, config.seed, trial);
    let mut next = vec![0.0; n];
    let e0 = norm(&y);
    let mut errors = Vec::with_capacity(config.iterations + 1);
    errors.push(1.0);
    for _ in 0..config.iterations {
        for (i, out) in next.iter_mut().enumerate() {
            *out = rows[i * n..(i + 1) * n].iter().zip(&y).map(|(w, x)| w * x).sum();
        }
        center(&mut next);
        std::mem::swap(&mut y, &mut next);
        errors.push(norm(&y) / e0);
    }
    errors
}

/// Runs `config.trials` independent trials and averages their error curves.
/// Trial `k` draws its initial values from a generator seeded with
/// `seed ^ k`, so results do not depend on scheduling.
pub fn run_trials(matrix: &WeightMatrix, config: &SimulationConfig) -> Result<ConvergenceTrace> {
    config.validate()?;
    let n = matrix.dim();
    let mut warnings = Vec::new();
    let s = slem(matrix)?;
    if s >= 1.0 {
        warnings.push(format!("slem {s} ≥ 1: the iteration does not converge to the average"));
    }
    let m = matrix.matrix();
    let rows: Vec<f64> = (0..n).flat_map(|i| (0..n).map(move |j| m[(i, j)])).collect();
    let len = config.iterations + 1;

    let chunks: Vec<(Vec<f64>, Vec<Vec<f64>>)> = (0..config.trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut sum = vec![0.0; len];
            let mut kept = Vec::new();
            for trial in c * CHUNK..((c + 1) * CHUNK).min(config.trials) {
                let errors = run_one(&rows, n, config, trial);
                sum.iter_mut().zip(&errors).for_each(|(s, e)| *s += e);
                if config.keep_trials {
                    kept.push(errors);
                }
            }
            (sum, kept)
        })
        .collect();

    let mut total = vec![0.0; len];
    let mut per_trial = config.keep_trials.then(Vec::new);
    for (sum, kept) in chunks {
        total.iter_mut().zip(&sum).for_each(|(t, s)| *t += s);
        if let Some(all) = per_trial.as_mut() {
            all.extend(kept);
        }
    }
    let mean_error: Vec<f64> = total.iter().map(|s| s / config.trials as f64).collect();
    let decay = mean_error.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(ConvergenceTrace { mean_error, decay, per_trial, warnings })
}
