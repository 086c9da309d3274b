//! Optimal consumption under stochastic aging.
//!
//! The CRRA value function scales as `v(t,a,w) = f(t,a) w^(1-gamma)/(1-gamma)`
//! and `f` solves
//!
//! ```text
//! f_t + (1 + xi (kappa_t - a)/(T - t)) f_a + (sigma^2/2) f_aa
//!     + r(1-gamma) f - (rho + lambda(a)) f + gamma f^(1 - 1/gamma) = 0
//! ```
//!
//! with `f(T, .) = ((rho + lambda_T - r(1-gamma))/gamma)^(-gamma)`; the
//! optimal spending rate is `f^(-1/gamma)`. The module also carries the
//! logarithmic-utility pair `(f, h)`, the closed-form deterministic-aging
//! plan, and the small-volatility characteristics approximation.

use thiserror::Error;

use crate::bridge::{BridgeDynamics, BridgeError};
use crate::hazard::HazardModel;
use crate::pde::{solve_backward, BackwardOperator, Grid2D, PdeError, Source, Surface, SurfaceKind};
use crate::quad::adaptive_simpson;

const QUAD_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("risk aversion must be positive (gamma={gamma})")]
    NonPositiveGamma { gamma: f64 },
    #[error("terminal spending rate (rho + lambda_T - r(1-gamma))/gamma = {rate:.6} is not positive; the policy diverges")]
    Unstable { rate: f64 },
    #[error("gamma = 1 is the logarithmic branch; use the log-utility solver")]
    LogUtilityGamma,
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Bridge(#[from] BridgeError),
    #[error("chronological age {c_age} outside [{lo}, {hi}]")]
    AgeOutOfRange { c_age: f64, lo: f64, hi: f64 },
}

/// Time preferences and the return environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preferences {
    gamma: f64,
    rho: f64,
    r: f64,
}

impl Preferences {
    pub fn new(gamma: f64, rho: f64, r: f64) -> Result<Self, PolicyError> {
        if !(gamma > 0.0) {
            return Err(PolicyError::NonPositiveGamma { gamma });
        }
        Ok(Self { gamma, rho, r })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Consumption growth rate `k = (r - rho)/gamma`.
    pub fn k(&self) -> f64 {
        (self.r - self.rho) / self.gamma
    }
}

/// Terminal value `f_T`; errors when the stability condition fails (the
/// interest rate cannot exceed the discounting too much when `gamma < 1`).
pub fn terminal_f(prefs: &Preferences, lambda_t: f64) -> Result<f64, PolicyError> {
    let rate = (prefs.rho + lambda_t - prefs.r * (1.0 - prefs.gamma)) / prefs.gamma;
    if !(rate > 0.0) {
        return Err(PolicyError::Unstable { rate });
    }
    Ok(rate.powf(-prefs.gamma))
}

/// Explicit solution of the age-independent equation with constant hazard:
/// the substitution `G = f^(1/gamma)` makes it linear. Supplies the
/// truncation-edge values and the constant-hazard oracle.
pub fn constant_hazard_f(
    prefs: &Preferences,
    lambda: f64,
    remaining: f64,
) -> Result<f64, PolicyError> {
    let g_t = terminal_f(prefs, lambda)?.powf(1.0 / prefs.gamma);
    Ok(constant_hazard_g(prefs, lambda, remaining, g_t).powf(prefs.gamma))
}

fn constant_hazard_g(prefs: &Preferences, lambda: f64, remaining: f64, g_end: f64) -> f64 {
    let c = (prefs.r * (1.0 - prefs.gamma) - prefs.rho - lambda) / prefs.gamma;
    if c.abs() < 1e-14 {
        g_end + remaining
    } else {
        (g_end + 1.0 / c) * (c * remaining).exp() - 1.0 / c
    }
}

/// A solved CRRA consumption field.
#[derive(Debug, Clone)]
pub struct PolicySurface {
    f: Surface,
    prefs: Preferences,
    model: HazardModel,
    dynamics: BridgeDynamics,
    terminal: f64,
}

/// Solves the consumption equation; `gamma != 1`.
pub fn solve_policy(
    prefs: &Preferences,
    model: &HazardModel,
    dynamics: &BridgeDynamics,
    grid: &Grid2D,
) -> Result<PolicySurface, PolicyError> {
    if (prefs.gamma - 1.0).abs() < 1e-12 {
        return Err(PolicyError::LogUtilityGamma);
    }
    dynamics.check_model(model)?;
    let f_t = terminal_f(prefs, model.lambda_t())?;
    let horizon = dynamics.horizon();
    let xi = dynamics.xi();
    let kappa0 = model.kappa0();
    let gamma = prefs.gamma;
    let decay = prefs.rho - prefs.r * (1.0 - gamma);

    // the far-young edge solves the hazard-free equation on the same time
    // grid, implicitly with Picard lagging, mirroring the interior treatment
    let left_values = integrate_edge_ode(prefs, grid.t_nodes(), f_t)?;
    let t_nodes = grid.t_nodes().to_vec();
    let left = move |t: f64| {
        let i = t_nodes.partition_point(|&x| x < t - 1e-9);
        left_values[i]
    };
    let lam_max = model.hazard(grid.a_max());
    let prefs_c = *prefs;
    let right = move |t: f64| {
        constant_hazard_f(&prefs_c, lam_max, horizon - t).expect("stability already checked")
    };

    let drift = move |t: f64, a: f64| 1.0 + xi * (kappa0 + t - a) / (horizon - t);
    let zeroth = move |a: f64| model.hazard(a) + decay;
    let source =
        move |_t: f64, _a: f64, u: f64| gamma * u.max(f64::MIN_POSITIVE).powf(1.0 - 1.0 / gamma);

    let mut surface = Surface::new(grid.clone(), SurfaceKind::PolicyF);
    let op = BackwardOperator {
        drift: &drift,
        diffusion: 0.5 * dynamics.sigma() * dynamics.sigma(),
        zeroth: &zeroth,
        left: &left,
        right: &right,
    };
    solve_backward(&mut surface, &op, &Source::Nonlinear(&source), &|_| f_t)?;
    Ok(PolicySurface { f: surface, prefs: *prefs, model: *model, dynamics: *dynamics, terminal: f_t })
}

/// Implicit Crank-Nicolson march of `f' = (rho - r(1-gamma)) f - gamma f^(1-1/gamma)`
/// down the grid's time levels, Picard on the nonlinear term.
fn integrate_edge_ode(
    prefs: &Preferences,
    t_nodes: &[f64],
    f_terminal: f64,
) -> Result<Vec<f64>, PolicyError> {
    let gamma = prefs.gamma;
    let lin = prefs.r * (1.0 - gamma) - prefs.rho;
    let src = |f: f64| gamma * f.max(f64::MIN_POSITIVE).powf(1.0 - 1.0 / gamma);
    let n = t_nodes.len();
    let mut values = vec![0.0; n];
    values[n - 1] = f_terminal;
    for i in (0..n - 1).rev() {
        let dt = t_nodes[i + 1] - t_nodes[i];
        let f1 = values[i + 1];
        let rhs = f1 + 0.5 * dt * (lin * f1 + src(f1));
        let denom = 1.0 - 0.5 * dt * lin;
        let mut guess = f1;
        let mut converged = false;
        for _ in 0..crate::pde::PICARD_MAX {
            let next = (rhs + 0.5 * dt * src(guess)) / denom;
            let done = (next - guess).abs() <= crate::pde::PICARD_TOL * next.abs().max(1.0);
            guess = next;
            if done {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(PolicyError::Pde(PdeError::PicardNoConvergence {
                t: t_nodes[i],
                iterations: crate::pde::PICARD_MAX,
                residual: f64::NAN,
            }));
        }
        values[i] = guess;
    }
    Ok(values)
}

impl PolicySurface {
    /// Optimal spending as a fraction of wealth per year, `f^(-1/gamma)`.
    pub fn spending_rate(&self, c_age: f64, b_age: f64) -> Result<f64, PolicyError> {
        let lo = self.model.kappa0();
        let hi = self.model.kappa_t();
        if !(lo - 1e-9..=hi + 1e-9).contains(&c_age) {
            return Err(PolicyError::AgeOutOfRange { c_age, lo, hi });
        }
        let f = self.f.value_at(c_age - lo, b_age)?;
        Ok(f.powf(-1.0 / self.prefs.gamma))
    }

    /// Indirect utility of holding `wealth` at the given age pair.
    pub fn value(&self, c_age: f64, b_age: f64, wealth: f64) -> Result<f64, PolicyError> {
        let lo = self.model.kappa0();
        let f = self.f.value_at(c_age - lo, b_age)?;
        let g = self.prefs.gamma;
        Ok(f * wealth.powf(1.0 - g) / (1.0 - g))
    }

    pub fn surface(&self) -> &Surface {
        &self.f
    }

    pub fn terminal_f(&self) -> f64 {
        self.terminal
    }

    pub fn preferences(&self) -> &Preferences {
        &self.prefs
    }

    pub fn model(&self) -> &HazardModel {
        &self.model
    }

    pub fn dynamics(&self) -> &BridgeDynamics {
        &self.dynamics
    }
}

/// Logarithmic-utility solution pair: `v = f log w + h`, consumption `w/f`.
#[derive(Debug, Clone)]
pub struct LogPolicySurface {
    f: Surface,
    h: Surface,
    rho: f64,
    r: f64,
    model: HazardModel,
    dynamics: BridgeDynamics,
}

/// Solves the two linear equations of the `gamma = 1` branch; `h` consumes
/// the solved `f` through its source term `r f - log f - 1`.
pub fn solve_log_policy(
    rho: f64,
    r: f64,
    model: &HazardModel,
    dynamics: &BridgeDynamics,
    grid: &Grid2D,
) -> Result<LogPolicySurface, PolicyError> {
    dynamics.check_model(model)?;
    let horizon = dynamics.horizon();
    let xi = dynamics.xi();
    let kappa0 = model.kappa0();
    let lambda_t = model.lambda_t();
    let lam_max = model.hazard(grid.a_max());
    let f_t = 1.0 / (rho + lambda_t);
    let h_t = (r * f_t - f_t.ln() - 1.0) / (rho + lambda_t);
    let diffusion = 0.5 * dynamics.sigma() * dynamics.sigma();

    let drift = move |t: f64, a: f64| 1.0 + xi * (kappa0 + t - a) / (horizon - t);
    let zeroth = move |a: f64| rho + model.hazard(a);

    // linear edge dynamics close in exponentials on both truncation ends
    let relax = move |lam: f64, t: f64| {
        let level = 1.0 / (rho + lam);
        level + (f_t - level) * (-(rho + lam) * (horizon - t)).exp()
    };
    let f_left = move |t: f64| relax(0.0, t);
    let f_right = move |t: f64| relax(lam_max, t);

    let mut f = Surface::new(grid.clone(), SurfaceKind::PolicyF);
    let op = BackwardOperator {
        drift: &drift,
        diffusion,
        zeroth: &zeroth,
        left: &f_left,
        right: &f_right,
    };
    solve_backward(&mut f, &op, &Source::Linear(&|_, _| 1.0), &|_| f_t)?;

    // scalar quadrature of the h edge equations on the same levels
    let h_edge = |lam: f64, f_edge: &dyn Fn(f64) -> f64| -> Vec<f64> {
        let t_nodes = grid.t_nodes();
        let q = |t: f64| {
            let fv = f_edge(t);
            r * fv - fv.ln() - 1.0
        };
        let n = t_nodes.len();
        let mut vals = vec![0.0; n];
        vals[n - 1] = h_t;
        for i in (0..n - 1).rev() {
            let dt = t_nodes[i + 1] - t_nodes[i];
            let decay = rho + lam;
            let rhs = vals[i + 1] * (1.0 - 0.5 * dt * decay)
                + 0.5 * dt * (q(t_nodes[i]) + q(t_nodes[i + 1]));
            vals[i] = rhs / (1.0 + 0.5 * dt * decay);
        }
        vals
    };
    let h_left_values = h_edge(0.0, &f_left);
    let h_right_values = h_edge(lam_max, &f_right);
    let t_nodes = grid.t_nodes().to_vec();
    let level_of = move |t: f64| t_nodes.partition_point(|&x| x < t - 1e-9);
    let h_left = {
        let level_of = level_of.clone();
        move |t: f64| h_left_values[level_of(t)]
    };
    let h_right = {
        let level_of = level_of.clone();
        move |t: f64| h_right_values[level_of(t)]
    };

    let f_ref = &f;
    let a_min = grid.a_min();
    let da = grid.da();
    let h_source = move |t: f64, a: f64| {
        let level = level_of(t);
        let j = ((a - a_min) / da).round() as usize;
        let fv = f_ref.level(level)[j];
        r * fv - fv.ln() - 1.0
    };

    let mut h = Surface::new(grid.clone(), SurfaceKind::PolicyH);
    let op_h = BackwardOperator {
        drift: &drift,
        diffusion,
        zeroth: &zeroth,
        left: &h_left,
        right: &h_right,
    };
    solve_backward(&mut h, &op_h, &Source::Linear(&h_source), &|_| h_t)?;

    Ok(LogPolicySurface { f, h, rho, r, model: *model, dynamics: *dynamics })
}

impl LogPolicySurface {
    /// Optimal spending fraction `1/f`: the first-order condition of the
    /// log-utility problem gives consumption `w/f`, consistent with the
    /// `gamma -> 1` limit of the CRRA rate.
    pub fn spending_rate(&self, c_age: f64, b_age: f64) -> Result<f64, PolicyError> {
        let lo = self.model.kappa0();
        let hi = self.model.kappa_t();
        if !(lo - 1e-9..=hi + 1e-9).contains(&c_age) {
            return Err(PolicyError::AgeOutOfRange { c_age, lo, hi });
        }
        Ok(1.0 / self.f.value_at(c_age - lo, b_age)?)
    }

    /// Indirect utility `f log w + h`.
    pub fn value(&self, c_age: f64, b_age: f64, wealth: f64) -> Result<f64, PolicyError> {
        let lo = self.model.kappa0();
        let f = self.f.value_at(c_age - lo, b_age)?;
        let h = self.h.value_at(c_age - lo, b_age)?;
        Ok(f * wealth.ln() + h)
    }

    pub fn f_surface(&self) -> &Surface {
        &self.f
    }

    pub fn h_surface(&self) -> &Surface {
        &self.h
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn model(&self) -> &HazardModel {
        &self.model
    }

    pub fn dynamics(&self) -> &BridgeDynamics {
        &self.dynamics
    }
}

/// Deterministic-aging plan: biological age tracks chronological age, so the
/// optimal path is a quadrature away. Survival follows the hazard model up to
/// the horizon and the flat terminal hazard beyond it, matching the limit of
/// the stochastic solver as `sigma -> 0`.
#[derive(Debug, Clone)]
pub struct DeterministicPlan {
    c0: f64,
    w0: f64,
    prefs: Preferences,
    model: HazardModel,
}

pub fn deterministic_plan(
    prefs: &Preferences,
    model: &HazardModel,
    w0: f64,
) -> Result<DeterministicPlan, PolicyError> {
    let g_t = terminal_f(prefs, model.lambda_t())?.powf(1.0 / prefs.gamma);
    let k = prefs.k();
    let horizon = model.horizon();
    let integrand =
        |s: f64| ((k - prefs.r) * s).exp() * model.gompertz_survival(s).powf(1.0 / prefs.gamma);
    let head = adaptive_simpson(integrand, 0.0, horizon, QUAD_TOL);
    // beyond the horizon the integrand decays exactly exponentially; the
    // terminal value of G closes that tail in closed form
    let budget = head + integrand(horizon) * g_t;
    Ok(DeterministicPlan { c0: w0 / budget, w0, prefs: *prefs, model: *model })
}

impl DeterministicPlan {
    /// Initial consumption in dollars per year.
    pub fn initial_consumption(&self) -> f64 {
        self.c0
    }

    /// Initial spending rate `c0 / W0`.
    pub fn initial_rate(&self) -> f64 {
        self.c0 / self.w0
    }

    /// Consumption at plan age `s`: `c0 e^{ks} p(s)^{1/gamma}`.
    pub fn consumption(&self, s: f64) -> f64 {
        self.c0 * (self.prefs.k() * s).exp() * self.survival(s).powf(1.0 / self.prefs.gamma)
    }

    /// Wealth remaining at plan age `t`.
    pub fn wealth(&self, t: f64) -> f64 {
        let k = self.prefs.k();
        let r = self.prefs.r;
        let gamma = self.prefs.gamma;
        let spent = adaptive_simpson(
            |s: f64| ((k - r) * s).exp() * self.survival(s).powf(1.0 / gamma),
            0.0,
            t,
            QUAD_TOL,
        );
        (self.w0 - self.c0 * spent) * (r * t).exp()
    }

    /// Model survival with aging stopped at the horizon.
    pub fn survival(&self, s: f64) -> f64 {
        let horizon = self.model.horizon();
        if s <= horizon {
            self.model.gompertz_survival(s)
        } else {
            self.model.gompertz_survival(horizon) * (-(s - horizon) * self.model.lambda_t()).exp()
        }
    }
}

/// Leading-order spending approximation along the deterministic age
/// characteristic `a(t) = kappa_t + (a0 - kappa0) ((T-t)/T)^xi`; the
/// transformed equation for `G = F^{1/gamma}` is linear and is integrated
/// with exponential midpoint steps.
#[derive(Debug, Clone)]
pub struct CharacteristicsApprox {
    ts: Vec<f64>,
    rates: Vec<f64>,
    a0: f64,
    xi: f64,
    kappa0: f64,
    horizon: f64,
}

pub fn characteristics_approx(
    prefs: &Preferences,
    model: &HazardModel,
    dynamics: &BridgeDynamics,
    a0: f64,
) -> Result<CharacteristicsApprox, PolicyError> {
    dynamics.check_model(model)?;
    let horizon = dynamics.horizon();
    let xi = dynamics.xi();
    let kappa0 = model.kappa0();
    let age_at = |t: f64| kappa0 + t + (a0 - kappa0) * ((horizon - t) / horizon).powf(xi);
    let mut g = terminal_f(prefs, model.lambda_t())?.powf(1.0 / prefs.gamma);
    let steps_per_year = 4096;
    let n = (horizon * steps_per_year as f64).round() as usize;
    let dt = horizon / n as f64;
    let mut ts = Vec::with_capacity(n + 1);
    let mut rates = Vec::with_capacity(n + 1);
    ts.push(horizon);
    rates.push(1.0 / g);
    for i in (0..n).rev() {
        let t_lo = i as f64 * dt;
        let t_mid = t_lo + 0.5 * dt;
        let lam = model.hazard(age_at(t_mid));
        g = constant_hazard_g(prefs, lam, dt, g);
        ts.push(t_lo);
        rates.push(1.0 / g);
    }
    ts.reverse();
    rates.reverse();
    Ok(CharacteristicsApprox { ts, rates, a0, xi, kappa0, horizon })
}

impl CharacteristicsApprox {
    /// The deterministic biological-age path the expansion rides on.
    pub fn age_at(&self, t: f64) -> f64 {
        self.kappa0
            + t
            + (self.a0 - self.kappa0) * ((self.horizon - t) / self.horizon).powf(self.xi)
    }

    /// Approximate spending rate at elapsed time `t`.
    pub fn rate_at(&self, t: f64) -> f64 {
        let n = self.ts.len();
        let x = (t / self.horizon * (n - 1) as f64).clamp(0.0, (n - 1) as f64);
        let i = (x.floor() as usize).min(n - 2);
        let w = x - i as f64;
        self.rates[i] * (1.0 - w) + self.rates[i + 1] * w
    }

    pub fn initial_rate(&self) -> f64 {
        self.rates[0]
    }
}
