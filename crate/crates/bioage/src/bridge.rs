//! Generalized Brownian-bridge dynamics for biological age.
//!
//! Biological age decomposes as `A_t = kappa_t + Y_t` where the gap process
//! follows `dY = -xi * Y/(T-t) dt + sigma dB` and is pinned to zero at the
//! horizon. Transitions are sampled from the exact conditional Gaussian law
//! (no Euler discretization in `Y`), and mortality is layered on top by
//! integrating the hazard along the path against a unit-exponential draw.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use thiserror::Error;

use crate::hazard::HazardModel;

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("mean reversion must be positive (xi={xi})")]
    NonPositiveReversion { xi: f64 },
    #[error("volatility must be non-negative (sigma={sigma})")]
    NegativeVolatility { sigma: f64 },
    #[error("horizon must be positive (T={horizon})")]
    NonPositiveHorizon { horizon: f64 },
    #[error("transition times must satisfy 0 <= s < t < T (s={s}, t={t}, T={horizon})")]
    BadTransitionTimes { s: f64, t: f64, horizon: f64 },
    #[error("step size must be positive (dt={dt})")]
    NonPositiveStep { dt: f64 },
    #[error("hazard model pins ages [{model_k0}, {model_kt}] but the bridge runs on [{dyn_k0}, {dyn_kt}]")]
    IncompatibleModel { model_k0: f64, model_kt: f64, dyn_k0: f64, dyn_kt: f64 },
}

/// Parameters of the biological-age bridge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeDynamics {
    xi: f64,
    sigma: f64,
    kappa0: f64,
    horizon: f64,
    a0: f64,
}

impl BridgeDynamics {
    /// New dynamics with the initial biological age equal to `kappa0`.
    pub fn new(xi: f64, sigma: f64, kappa0: f64, horizon: f64) -> Result<Self, BridgeError> {
        if !(xi > 0.0) {
            return Err(BridgeError::NonPositiveReversion { xi });
        }
        if !(sigma >= 0.0) {
            return Err(BridgeError::NegativeVolatility { sigma });
        }
        if !(horizon > 0.0) {
            return Err(BridgeError::NonPositiveHorizon { horizon });
        }
        Ok(Self { xi, sigma, kappa0, horizon, a0: kappa0 })
    }

    /// Same dynamics with a different starting biological age.
    pub fn with_initial_age(mut self, a0: f64) -> Self {
        self.a0 = a0;
        self
    }

    /// Same dynamics with a different volatility; used by the calibration
    /// sweep.
    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma.max(0.0);
        self
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    /// Time at which the bridge pins and aging stops.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn initial_age(&self) -> f64 {
        self.a0
    }

    /// Chronological age at elapsed time `t` (constant beyond the horizon).
    pub fn chron_age(&self, t: f64) -> f64 {
        self.kappa0 + t.min(self.horizon)
    }

    /// Checks that a hazard model shares this bridge's age coordinates.
    pub fn check_model(&self, model: &HazardModel) -> Result<(), BridgeError> {
        let ok = (model.kappa0() - self.kappa0).abs() < 1e-9
            && (model.horizon() - self.horizon).abs() < 1e-9;
        if ok {
            Ok(())
        } else {
            Err(BridgeError::IncompatibleModel {
                model_k0: model.kappa0(),
                model_kt: model.kappa_t(),
                dyn_k0: self.kappa0,
                dyn_kt: self.kappa0 + self.horizon,
            })
        }
    }

    /// Conditional mean and variance of the gap `Y_t` given `Y_s = ys`.
    ///
    /// The variance uses the logarithmic branch at `xi = 1/2` and a series
    /// expansion near it, where the closed form cancels catastrophically.
    pub fn conditional_moments(&self, s: f64, t: f64, ys: f64) -> Result<(f64, f64), BridgeError> {
        if !(s >= 0.0 && t > s && t < self.horizon) {
            return Err(BridgeError::BadTransitionTimes { s, t, horizon: self.horizon });
        }
        let ratio = (self.horizon - t) / (self.horizon - s);
        let mean = ratio.powf(self.xi) * ys;
        let delta = 2.0 * self.xi - 1.0;
        let sig2 = self.sigma * self.sigma;
        let log_ratio = ((self.horizon - s) / (self.horizon - t)).ln();
        let var = if delta.abs() < 1e-6 {
            // (1 - ratio^delta)/delta ~ L (1 - dL/2 + (dL)^2/6), L = log((T-s)/(T-t))
            let dl = delta * log_ratio;
            sig2 * (self.horizon - t) * log_ratio * (1.0 - dl / 2.0 + dl * dl / 6.0)
        } else {
            sig2 * (self.horizon - t) / delta * (1.0 - ratio.powf(delta))
        };
        Ok((mean, var.max(0.0)))
    }

    /// Draws `Y_t` given `Y_s = ys` from the exact conditional Gaussian.
    pub fn sample_transition(
        &self,
        s: f64,
        t: f64,
        ys: f64,
        rng: &mut impl Rng,
    ) -> Result<f64, BridgeError> {
        let (mean, var) = self.conditional_moments(s, t, ys)?;
        if var == 0.0 {
            return Ok(mean);
        }
        let z: f64 = rng.sample(StandardNormal);
        Ok(mean + var.sqrt() * z)
    }

    /// Simulates one biological-age path with mortality.
    ///
    /// The age is stepped on a `dt` grid by exact transitions; death arrives
    /// when the trapezoidal integral of the hazard first crosses an
    /// independent unit-exponential draw. Beyond the pinning time the age
    /// stays at `kappa_T` and the constant terminal hazard makes the residual
    /// death time exactly exponential, so no grid is needed there.
    pub fn simulate_path(
        &self,
        model: &HazardModel,
        dt: f64,
        horizon: f64,
        rng: &mut impl Rng,
    ) -> Result<SimulatedPath, BridgeError> {
        if !(dt > 0.0) {
            return Err(BridgeError::NonPositiveStep { dt });
        }
        self.check_model(model)?;
        let mut times = vec![0.0];
        let mut b_ages = vec![self.a0];
        let mut walk = PathWalk::start(self, model, 0.0, self.a0, rng);
        let t_grid_end = horizon.min(self.horizon);
        let mut t = 0.0_f64;
        let mut death = None;
        while t < t_grid_end - 1e-12 {
            let t_next = (t + dt).min(t_grid_end);
            if let Some(zeta) = walk.advance(self, model, t_next, rng) {
                death = Some(zeta);
                break;
            }
            times.push(t_next);
            b_ages.push(walk.age);
            t = t_next;
        }
        if death.is_none() && horizon > self.horizon {
            // flat segment beyond the pin: residual lifetime is exponential
            let zeta = self.horizon + walk.hazard_budget_left() / model.lambda_t();
            if zeta <= horizon {
                death = Some(zeta);
            } else {
                let mut s = self.horizon;
                while s < horizon - 1e-12 {
                    s = (s + dt).min(horizon);
                    times.push(s);
                    b_ages.push(model.kappa_t());
                }
            }
        }
        Ok(SimulatedPath { times, b_ages, death_time: death })
    }
}

/// One simulated trajectory; ages recorded up to death or the requested
/// horizon, whichever comes first.
#[derive(Debug, Clone)]
pub struct SimulatedPath {
    pub times: Vec<f64>,
    pub b_ages: Vec<f64>,
    pub death_time: Option<f64>,
}

/// Incremental path state shared by the simulators and the Monte Carlo
/// estimators: current gap, accumulated hazard and the exponential budget.
pub(crate) struct PathWalk {
    pub(crate) t: f64,
    pub(crate) age: f64,
    hazard_acc: f64,
    hazard_at: f64,
    budget: f64,
}

impl PathWalk {
    pub(crate) fn start(
        dynamics: &BridgeDynamics,
        model: &HazardModel,
        t0: f64,
        a0: f64,
        rng: &mut impl Rng,
    ) -> Self {
        let _ = dynamics;
        let budget: f64 = rng.sample(Exp1);
        Self { t: t0, age: a0, hazard_acc: 0.0, hazard_at: model.hazard(a0), budget }
    }

    /// Steps to `t_next <= horizon`; returns the death time if the integrated
    /// hazard crosses the budget inside the step.
    pub(crate) fn advance(
        &mut self,
        dynamics: &BridgeDynamics,
        model: &HazardModel,
        t_next: f64,
        rng: &mut impl Rng,
    ) -> Option<f64> {
        let horizon = dynamics.horizon();
        let y_next = if t_next >= horizon - 1e-12 {
            0.0 // pinned
        } else {
            let ys = self.age - dynamics.chron_age(self.t);
            dynamics
                .sample_transition(self.t, t_next, ys, rng)
                .expect("monotone step inside the horizon")
        };
        let a_next = dynamics.chron_age(t_next) + y_next;
        let lam_next = model.hazard(a_next);
        let dt = t_next - self.t;
        let increment = 0.5 * dt * (self.hazard_at + lam_next);
        let crossed = self.hazard_acc + increment >= self.budget;
        let death = if crossed && increment > 0.0 {
            Some(self.t + dt * (self.budget - self.hazard_acc) / increment)
        } else {
            None
        };
        self.t = t_next;
        self.age = a_next;
        self.hazard_acc += increment;
        self.hazard_at = lam_next;
        death
    }

    /// Remaining exponential budget `E - H_t`; exponential again by
    /// memorylessness, so the flat-hazard tail can be closed analytically.
    pub(crate) fn hazard_budget_left(&self) -> f64 {
        (self.budget - self.hazard_acc).max(0.0)
    }
}

/// Independent per-path generator stream: path `i` under a given seed is
/// reproducible regardless of how paths are scheduled across threads.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut state = seed ^ path_index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let mut next = || {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&next().to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
