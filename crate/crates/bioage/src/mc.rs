//! Monte Carlo estimators over simulated paths; the independent oracle every
//! PDE output is triangulated against.
//!
//! Paths are embarrassingly parallel with one seeded stream per path index,
//! and reductions use pairwise summation over the collected per-path values,
//! so every estimate is bit-for-bit reproducible regardless of the worker
//! count.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use thiserror::Error;

use crate::bridge::{path_rng, BridgeDynamics, BridgeError, PathWalk};
use crate::hazard::HazardModel;

#[derive(Debug, Error)]
pub enum McError {
    #[error(transparent)]
    Bridge(#[from] BridgeError),
    #[error("need at least one path")]
    NoPaths,
    #[error("observation time {t} must lie before the pinning horizon {horizon}")]
    TimePastHorizon { t: f64, horizon: f64 },
    #[error("only {survivors} paths survived; at least {needed} needed for quantiles")]
    InsufficientSurvivors { survivors: usize, needed: usize },
}

/// One Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_paths: u64,
    pub seed: u64,
}

/// An empirical quantile with a distribution-free standard error from the
/// binomial order-statistic bracket.
#[derive(Debug, Clone, Copy)]
pub struct QuantileEstimate {
    pub q: f64,
    pub value: f64,
    pub std_error: f64,
}

/// Deterministic pairwise sum; insensitive to thread scheduling because it
/// runs over an index-ordered buffer.
fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

fn run_paths<T, F>(n_paths: u64, seed: u64, body: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut rand_chacha::ChaCha8Rng) -> T + Sync,
{
    (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i);
            body(i, &mut rng)
        })
        .collect()
}

/// Walks one path from `(t0, a0)` to `until` (capped at the horizon);
/// `Err(zeta)` means death at `zeta`, `Ok` carries the walk for continuation.
fn walk_segment(
    model: &HazardModel,
    dynamics: &BridgeDynamics,
    t0: f64,
    a0: f64,
    until: f64,
    dt: f64,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<PathWalk, f64> {
    let mut walk = PathWalk::start(dynamics, model, t0, a0, rng);
    let mut t = t0;
    while t < until - 1e-12 {
        let t_next = (t + dt).min(until);
        if let Some(zeta) = walk.advance(dynamics, model, t_next, rng) {
            return Err(zeta);
        }
        t = t_next;
    }
    Ok(walk)
}

/// Mean remaining lifetime from a `(time, biological age)` start. Starts at
/// or past the pinning horizon reduce to the flat terminal hazard, i.e. an
/// exponential draw.
pub fn mc_erl(
    model: &HazardModel,
    dynamics: &BridgeDynamics,
    start: (f64, f64),
    n_paths: u64,
    dt: f64,
    seed: u64,
) -> Result<McEstimate, McError> {
    if n_paths == 0 {
        return Err(McError::NoPaths);
    }
    dynamics.check_model(model)?;
    let (t0, a0) = start;
    let horizon = dynamics.horizon();
    let remaining: Vec<f64> = run_paths(n_paths, seed, |_, rng| {
        if t0 >= horizon {
            let e: f64 = rng.sample(Exp1);
            e / model.lambda_t()
        } else {
            match walk_segment(model, dynamics, t0, a0, horizon, dt, rng) {
                Err(zeta) => zeta - t0,
                Ok(walk) => horizon - t0 + walk.hazard_budget_left() / model.lambda_t(),
            }
        }
    });
    Ok(estimate_mean(&remaining, n_paths, seed))
}

/// Survivor fraction at time `t`, with the binomial standard error.
pub fn mc_survival(
    model: &HazardModel,
    dynamics: &BridgeDynamics,
    t: f64,
    n_paths: u64,
    dt: f64,
    seed: u64,
) -> Result<McEstimate, McError> {
    if n_paths == 0 {
        return Err(McError::NoPaths);
    }
    dynamics.check_model(model)?;
    let horizon = dynamics.horizon();
    let a0 = dynamics.initial_age();
    let alive: Vec<f64> = run_paths(n_paths, seed, |_, rng| {
        if t <= 0.0 {
            return 1.0;
        }
        let stop = t.min(horizon);
        match walk_segment(model, dynamics, 0.0, a0, stop, dt, rng) {
            Err(_) => 0.0,
            Ok(walk) => {
                if t > horizon {
                    // flat tail: die exponentially after the pin
                    let extra = walk.hazard_budget_left() / model.lambda_t();
                    if horizon + extra > t {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    1.0
                }
            }
        }
    });
    let p = pairwise_sum(&alive) / n_paths as f64;
    let se = (p * (1.0 - p) / n_paths as f64).sqrt();
    Ok(McEstimate { value: p, std_error: se, n_paths, seed })
}

/// Empirical survivor-age quantiles at time `t < T`.
pub fn mc_survivor_quantiles(
    model: &HazardModel,
    dynamics: &BridgeDynamics,
    t: f64,
    qs: &[f64],
    n_paths: u64,
    dt: f64,
    seed: u64,
) -> Result<Vec<QuantileEstimate>, McError> {
    if n_paths == 0 {
        return Err(McError::NoPaths);
    }
    dynamics.check_model(model)?;
    let horizon = dynamics.horizon();
    if t >= horizon {
        return Err(McError::TimePastHorizon { t, horizon });
    }
    let a0 = dynamics.initial_age();
    let ages: Vec<Option<f64>> = run_paths(n_paths, seed, |_, rng| {
        match walk_segment(model, dynamics, 0.0, a0, t, dt, rng) {
            Err(_) => None,
            Ok(walk) => Some(walk.age),
        }
    });
    let mut survivors: Vec<f64> = ages.into_iter().flatten().collect();
    if survivors.len() < 100 {
        return Err(McError::InsufficientSurvivors { survivors: survivors.len(), needed: 100 });
    }
    survivors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = survivors.len();
    let at = |rank: f64| {
        let x = rank.clamp(0.0, (n - 1) as f64);
        let i = (x.floor() as usize).min(n - 2);
        let w = x - i as f64;
        survivors[i] * (1.0 - w) + survivors[i + 1] * w
    };
    Ok(qs
        .iter()
        .map(|&q| {
            let pos = q * (n - 1) as f64;
            let spread = 3.0 * (n as f64 * q * (1.0 - q)).sqrt();
            let lo = at(pos - spread);
            let hi = at(pos + spread);
            QuantileEstimate { q, value: at(pos), std_error: (hi - lo) / 6.0 }
        })
        .collect())
}

fn estimate_mean(xs: &[f64], n_paths: u64, seed: u64) -> McEstimate {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0).max(1.0);
    McEstimate { value: mean, std_error: (var / n).sqrt(), n_paths, seed }
}
