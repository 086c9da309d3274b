//! Forward sub-density `g(t, a)` of biological age among survivors,
//!
//! ```text
//! g_t + d/da[ (1 + xi (kappa_t - a)/(T - t)) g ] - (sigma^2/2) g_aa + lambda(a) g = 0,
//! ```
//!
//! plus everything read off it: the survival mass `S(t)`, survivor quantiles,
//! the population hazard, spending-dispersion bands and the volatility
//! calibration from observed consumption intervals.

use rayon::prelude::*;
use thiserror::Error;

use crate::bridge::{BridgeDynamics, BridgeError};
use crate::hazard::HazardModel;
use crate::pde::{
    solve_forward, ForwardOperator, Grid2D, PdeError, Surface, SurfaceKind,
};
use crate::policy::{solve_policy, PolicyError, PolicySurface, Preferences};

/// Elapsed time over which a point initial condition is realized through the
/// exact transition Gaussian instead of numerically.
const DELTA_REALIZATION: f64 = 0.25;
/// 95th percentile of the standard normal, for fitting Gaussians to 90% CIs.
const Z_95: f64 = 1.6448536269514722;

#[derive(Debug, Error)]
pub enum DensityError {
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Bridge(#[from] BridgeError),
    #[error("start time {start} is not a grid level")]
    StartOffGrid { start: f64 },
    #[error("initial density must carry positive mass")]
    EmptyInitialDensity,
    #[error("explicit initial density must have one value per age node ({expected}), got {got}")]
    BadInitialLength { expected: usize, got: usize },
    #[error("quantile probabilities must lie strictly inside (0, 1); got {q}")]
    BadQuantile { q: f64 },
    #[error("no quantile probabilities supplied")]
    EmptyQuantiles,
    #[error("policy and density were solved under different parameters")]
    MismatchedParameters,
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("calibration needs exactly two observation ages, got {got}")]
    NeedTwoAges { got: usize },
    #[error("observation ages must be distinct and inside [kappa0, kappaT)")]
    BadObservationAges,
    #[error("observed rates must satisfy 0 < lo <= hi < 1 (got [{lo}, {hi}])")]
    BadRates { lo: f64, hi: f64 },
    #[error("volatility bracket [{lo}, {hi}] is invalid")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

/// How the population looks when the forward solve starts.
#[derive(Debug, Clone)]
pub enum InitialSpec {
    /// Everyone at one biological age.
    DeltaAt(f64),
    /// Gaussian spread of biological ages (conditional on being alive).
    Gaussian { mean: f64, sd: f64 },
    /// Arbitrary density sampled on the grid's age nodes; normalized to unit
    /// mass.
    Explicit(Vec<f64>),
}

/// A solved survivor sub-density.
#[derive(Debug, Clone)]
pub struct SubDensitySurface {
    g: Surface,
    model: HazardModel,
    dynamics: BridgeDynamics,
    initial: InitialSpec,
    start_t: f64,
}

/// Survivor quantiles at one time slice.
#[derive(Debug, Clone)]
pub struct QuantileCurve {
    pub t: f64,
    pub qs: Vec<f64>,
    pub alphas: Vec<f64>,
    pub survival: f64,
}

/// Solves the forward equation from `start_t` (a grid level) out to the
/// horizon. Point and Gaussian starts are realized analytically over the
/// first quarter year through the exact bridge transition, with the
/// first-order mortality correction `exp(-lambda(a) dt)` applied pointwise.
pub fn solve_density(
    model: &HazardModel,
    dynamics: &BridgeDynamics,
    grid: &Grid2D,
    initial: &InitialSpec,
    start_t: f64,
) -> Result<SubDensitySurface, DensityError> {
    dynamics.check_model(model)?;
    let start_level =
        grid.level_at(start_t).ok_or(DensityError::StartOffGrid { start: start_t })?;
    let mut g = Surface::new(grid.clone(), SurfaceKind::DensityG);

    let numeric_start = match initial {
        InitialSpec::Explicit(row) => {
            if row.len() != grid.n_a() {
                return Err(DensityError::BadInitialLength {
                    expected: grid.n_a(),
                    got: row.len(),
                });
            }
            let mass: f64 = row.iter().sum::<f64>() * grid.da();
            if !(mass > 0.0) {
                return Err(DensityError::EmptyInitialDensity);
            }
            let normalized: Vec<f64> = row.iter().map(|v| v / mass).collect();
            *g.level_mut(start_level) = normalized;
            start_level
        }
        InitialSpec::DeltaAt(a0) => {
            analytic_start(&mut g, model, dynamics, grid, start_level, start_t, *a0, 0.0)?
        }
        InitialSpec::Gaussian { mean, sd } => {
            analytic_start(&mut g, model, dynamics, grid, start_level, start_t, *mean, *sd)?
        }
    };

    let horizon = dynamics.horizon();
    let xi = dynamics.xi();
    let kappa0 = model.kappa0();
    // the last step lands on the pin itself; flooring the denominator at half
    // that step keeps the drift finite while still sweeping mass onto kappa_T
    let last_dt = horizon - grid.t_nodes()[grid.n_t() - 2];
    let floor = 0.5 * last_dt;
    let drift = move |t: f64, a: f64| 1.0 + xi * (kappa0 + t - a) / (horizon - t).max(floor);
    let kill = move |a: f64| model.hazard(a);
    let op = ForwardOperator {
        drift: &drift,
        diffusion: 0.5 * dynamics.sigma() * dynamics.sigma(),
        kill: &kill,
    };
    solve_forward(&mut g, numeric_start, &op)?;
    Ok(SubDensitySurface {
        g,
        model: *model,
        dynamics: *dynamics,
        initial: initial.clone(),
        start_t,
    })
}

/// Fills levels from `start_level` through `start_t + DELTA_REALIZATION` with
/// the exact propagated Gaussian scaled by `exp(-lambda(a0) dt)`, returning
/// the level numeric stepping resumes from. Unit-mass rows are laid down
/// first and rescaled, so the survival mass equals the scalar factor by
/// construction.
#[allow(clippy::too_many_arguments)]
fn analytic_start(
    g: &mut Surface,
    model: &HazardModel,
    dynamics: &BridgeDynamics,
    grid: &Grid2D,
    start_level: usize,
    start_t: f64,
    mean0: f64,
    sd0: f64,
) -> Result<usize, DensityError> {
    let lam0 = model.hazard(mean0);
    fill_gaussian_row(g, grid, start_level, mean0, sd0 * sd0, 1.0)?;

    let y0 = mean0 - dynamics.chron_age(start_t);
    let mut level = start_level;
    while level + 1 < grid.n_t() {
        let t = grid.t_nodes()[level + 1];
        if t > start_t + DELTA_REALIZATION + 1e-9 {
            break;
        }
        level += 1;
        let (mean_y, var_y) = dynamics.conditional_moments(start_t, t, y0)?;
        let shrink = dynamics.conditional_moments(start_t, t, 1.0)?.0;
        let var = var_y + (shrink * sd0) * (shrink * sd0);
        let mean = dynamics.chron_age(t) + mean_y;
        let survival = (-lam0 * (t - start_t)).exp();
        fill_gaussian_row(g, grid, level, mean, var, survival)?;
    }
    Ok(level)
}

/// Writes a Gaussian slice of total trapezoidal mass exactly `mass`; spreads
/// narrower than the grid collapse onto the two nearest nodes.
fn fill_gaussian_row(
    g: &mut Surface,
    grid: &Grid2D,
    level: usize,
    mean: f64,
    var: f64,
    mass: f64,
) -> Result<(), DensityError> {
    let da = grid.da();
    if var.sqrt() < 0.5 * da {
        let (j, w) = grid.bracket_a(mean)?;
        let row = g.level_mut(level);
        row.fill(0.0);
        row[j] = (1.0 - w) * mass / da;
        row[j + 1] += w * mass / da;
        return Ok(());
    }
    let row: Vec<f64> = grid
        .a_nodes()
        .iter()
        .map(|&a| (-0.5 * (a - mean) * (a - mean) / var).exp())
        .collect();
    let raw_mass = trapezoid_mass(&row, da);
    if !(raw_mass > 0.0) {
        return Err(DensityError::EmptyInitialDensity);
    }
    let scale = mass / raw_mass;
    *g.level_mut(level) = row.into_iter().map(|v| v * scale).collect();
    Ok(())
}

impl SubDensitySurface {
    /// Survivor mass `S(t)` by trapezoidal quadrature of the slice at `t`.
    pub fn survival(&self, t: f64) -> Result<f64, DensityError> {
        let row = self.g.row_at(t)?;
        Ok(trapezoid_mass(&row, self.g.grid().da()))
    }

    /// Survivor-age quantiles at `t`: the normalized trapezoidal CDF is
    /// inverted inside each cell by bisection.
    pub fn quantiles(&self, t: f64, qs: &[f64]) -> Result<QuantileCurve, DensityError> {
        if qs.is_empty() {
            return Err(DensityError::EmptyQuantiles);
        }
        for &q in qs {
            if !(q > 0.0 && q < 1.0) {
                return Err(DensityError::BadQuantile { q });
            }
        }
        let row: Vec<f64> = self.g.row_at(t)?.iter().map(|v| v.max(0.0)).collect();
        let a = self.g.grid().a_nodes();
        let da = self.g.grid().da();
        let n = row.len();
        let mut cdf = vec![0.0; n];
        for j in 1..n {
            cdf[j] = cdf[j - 1] + 0.5 * da * (row[j - 1] + row[j]);
        }
        let total = cdf[n - 1];
        if !(total > 0.0) {
            return Err(DensityError::EmptyInitialDensity);
        }
        let mut alphas = Vec::with_capacity(qs.len());
        for &q in qs {
            let target = q * total;
            let j = match cdf.partition_point(|&c| c < target) {
                0 => 0,
                idx => idx - 1,
            };
            let j = j.min(n - 2);
            // quadratic CDF inside the cell (g linear there); bisect it
            let cell = |x: f64| {
                let w = (x - a[j]) / da;
                cdf[j] + da * (row[j] * w + 0.5 * (row[j + 1] - row[j]) * w * w)
            };
            let (mut lo, mut hi) = (a[j], a[j + 1]);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if cell(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-10 {
                    break;
                }
            }
            alphas.push(0.5 * (lo + hi));
        }
        Ok(QuantileCurve { t, qs: qs.to_vec(), alphas, survival: total })
    }

    /// Population hazard `-d/dt log S(t)` by centered differencing.
    pub fn population_hazard(&self, t: f64) -> Result<f64, DensityError> {
        let horizon = self.dynamics.horizon();
        let h = 0.25_f64.min(t - self.start_t).min(horizon - t).max(1e-3);
        let s_hi = self.survival(t + h)?;
        let s_lo = self.survival(t - h)?;
        Ok(-(s_hi.ln() - s_lo.ln()) / (2.0 * h))
    }

    /// Mean survivor biological age at `t`.
    pub fn mean_b_age(&self, t: f64) -> Result<f64, DensityError> {
        let row = self.g.row_at(t)?;
        let a = self.g.grid().a_nodes();
        let da = self.g.grid().da();
        let mut mass = 0.0;
        let mut first = 0.0;
        for j in 1..row.len() {
            mass += 0.5 * da * (row[j - 1] + row[j]);
            first += 0.5 * da * (row[j - 1] * a[j - 1] + row[j] * a[j]);
        }
        Ok(first / mass)
    }

    pub fn surface(&self) -> &Surface {
        &self.g
    }

    pub fn model(&self) -> &HazardModel {
        &self.model
    }

    pub fn dynamics(&self) -> &BridgeDynamics {
        &self.dynamics
    }

    pub fn initial(&self) -> &InitialSpec {
        &self.initial
    }

    pub fn start_t(&self) -> f64 {
        self.start_t
    }
}

fn trapezoid_mass(row: &[f64], da: f64) -> f64 {
    let inner: f64 = row[1..row.len() - 1].iter().sum();
    da * (inner + 0.5 * (row[0] + row[row.len() - 1]))
}

/// Spending-rate band at time `t`: the survivor age quantiles pushed through
/// the policy surface. Increasing in `q` because spending increases in
/// biological age.
pub fn spending_band(
    policy: &PolicySurface,
    density: &SubDensitySurface,
    t: f64,
    q_lo: f64,
    q_hi: f64,
) -> Result<(f64, f64), DensityError> {
    if policy.model() != density.model() || policy.dynamics() != density.dynamics() {
        return Err(DensityError::MismatchedParameters);
    }
    let curve = density.quantiles(t, &[q_lo, q_hi])?;
    let c_age = density.model().kappa0() + t;
    let lo = policy.spending_rate(c_age, curve.alphas[0])?;
    let hi = policy.spending_rate(c_age, curve.alphas[1])?;
    Ok((lo, hi))
}

/// One observed consumption interval: the central 90% range of spending
/// rates (fractions of wealth) at a chronological age.
#[derive(Debug, Clone, Copy)]
pub struct CalibrationObservation {
    pub c_age: f64,
    pub rate_lo: f64,
    pub rate_hi: f64,
}

#[derive(Debug, Clone)]
pub struct CalibrationResult {
    pub sigma_hat: f64,
    pub objective: f64,
    /// Model-implied consumption intervals at both observation ages under
    /// `sigma_hat`.
    pub fitted: Vec<CalibrationObservation>,
    pub evaluations: usize,
}

/// Calibrates the age volatility from two observed consumption intervals.
///
/// For each candidate volatility the earlier interval is inverted through the
/// policy surface into a biological-age interval, a Gaussian initial density
/// is fitted to it, the forward equation is pushed to the later age, and the
/// implied consumption interval there is compared with the observation.
/// Candidates from a coarse scan of the bracket run in parallel; a
/// golden-section search polishes the best one to 1e-3.
pub fn calibrate_sigma(
    observed: &[CalibrationObservation],
    prefs: &Preferences,
    model: &HazardModel,
    dynamics: &BridgeDynamics,
    grid: &Grid2D,
    bracket: (f64, f64),
) -> Result<CalibrationResult, CalibrationError> {
    if observed.len() != 2 {
        return Err(CalibrationError::NeedTwoAges { got: observed.len() });
    }
    let mut obs = [observed[0], observed[1]];
    obs.sort_by(|x, y| x.c_age.partial_cmp(&y.c_age).unwrap());
    let [first, second] = obs;
    let horizon_age = model.kappa_t();
    if first.c_age >= second.c_age
        || first.c_age < model.kappa0()
        || second.c_age >= horizon_age
    {
        return Err(CalibrationError::BadObservationAges);
    }
    for o in &obs {
        if !(o.rate_lo > 0.0 && o.rate_lo <= o.rate_hi && o.rate_hi < 1.0) {
            return Err(CalibrationError::BadRates { lo: o.rate_lo, hi: o.rate_hi });
        }
    }
    let (lo, hi) = bracket;
    if !(lo >= 0.0 && hi > lo) {
        return Err(CalibrationError::InvalidBracket { lo, hi });
    }

    let objective = |sigma: f64| -> Result<(f64, Vec<CalibrationObservation>), CalibrationError> {
        let dyn_sigma = dynamics.with_sigma(sigma);
        let policy = solve_policy(prefs, model, &dyn_sigma, grid)?;
        let t0 = first.c_age - model.kappa0();
        let t1 = second.c_age - model.kappa0();
        let b_lo = invert_rate(&policy, first.c_age, first.rate_lo)?;
        let b_hi = invert_rate(&policy, first.c_age, first.rate_hi)?;
        let mean = 0.5 * (b_lo + b_hi);
        let sd = (b_hi - b_lo) / (2.0 * Z_95);
        let initial = if sd < 1e-9 {
            InitialSpec::DeltaAt(mean)
        } else {
            InitialSpec::Gaussian { mean, sd }
        };
        let density = solve_density(model, &dyn_sigma, grid, &initial, t0)?;
        let curve = density.quantiles(t1, &[0.05, 0.95])?;
        let fit_lo = policy.spending_rate(second.c_age, curve.alphas[0])?;
        let fit_hi = policy.spending_rate(second.c_age, curve.alphas[1])?;
        let d_lo = fit_lo - second.rate_lo;
        let d_hi = fit_hi - second.rate_hi;
        let fitted = vec![
            CalibrationObservation { c_age: first.c_age, rate_lo: first.rate_lo, rate_hi: first.rate_hi },
            CalibrationObservation { c_age: second.c_age, rate_lo: fit_lo, rate_hi: fit_hi },
        ];
        Ok((d_lo * d_lo + d_hi * d_hi, fitted))
    };

    // coarse parallel scan to localize the minimum
    let scan_n = 7usize;
    let scan: Vec<f64> =
        (0..scan_n).map(|i| lo + (hi - lo) * i as f64 / (scan_n - 1) as f64).collect();
    let scanned: Vec<(f64, f64)> = scan
        .par_iter()
        .map(|&s| objective(s).map(|(v, _)| (s, v)))
        .collect::<Result<_, _>>()?;
    let mut evaluations = scan_n;
    let best = scanned
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let mut a = if best == 0 { scan[0] } else { scan[best - 1] };
    let mut b = if best + 1 == scan_n { scan[scan_n - 1] } else { scan[best + 1] };

    // golden-section polish
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INVPHI * (b - a);
    let mut x2 = a + INVPHI * (b - a);
    let mut f1 = objective(x1)?.0;
    let mut f2 = objective(x2)?.0;
    evaluations += 2;
    while b - a > 1e-3 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INVPHI * (b - a);
            f1 = objective(x1)?.0;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INVPHI * (b - a);
            f2 = objective(x2)?.0;
        }
        evaluations += 1;
    }
    let sigma_hat = 0.5 * (a + b);
    let (obj, fitted) = objective(sigma_hat)?;
    evaluations += 1;
    Ok(CalibrationResult { sigma_hat, objective: obj, fitted, evaluations })
}

/// Inverts the spending rate to a biological age at fixed chronological age
/// by bisection; the rate is strictly increasing in biological age.
fn invert_rate(policy: &PolicySurface, c_age: f64, rate: f64) -> Result<f64, PolicyError> {
    let grid = policy.surface().grid();
    let (mut lo, mut hi) = (grid.a_min(), grid.a_max());
    let r_lo = policy.spending_rate(c_age, lo)?;
    let r_hi = policy.spending_rate(c_age, hi)?;
    let target = rate.clamp(r_lo, r_hi);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if policy.spending_rate(c_age, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-10 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::GridSpec;

    fn canonical() -> (HazardModel, BridgeDynamics, Grid2D) {
        let model = HazardModel::from_pinned(0.005, 1.0, 60.0, 110.0).unwrap();
        let dynamics = BridgeDynamics::new(1.0, 0.3, 60.0, 50.0).unwrap();
        let grid = Grid2D::build(&model, &dynamics, &GridSpec::default()).unwrap();
        (model, dynamics, grid)
    }

    #[test]
    fn delta_start_mass_matches_first_order_decay() {
        let (model, dynamics, grid) = canonical();
        let d =
            solve_density(&model, &dynamics, &grid, &InitialSpec::DeltaAt(60.0), 0.0).unwrap();
        let got = d.survival(DELTA_REALIZATION).unwrap();
        let expected = (-0.005 * DELTA_REALIZATION).exp();
        assert!((got - expected).abs() < 1e-6, "{got} vs {expected}");
    }

    #[test]
    fn no_killing_keeps_the_unconditional_law() {
        // with negligible hazard the slice mean is the chronological age
        let model = HazardModel::from_pinned(1e-12, 2e-12, 60.0, 110.0).unwrap();
        let dynamics = BridgeDynamics::new(1.0, 0.3, 60.0, 50.0).unwrap();
        let grid = Grid2D::build(&model, &dynamics, &GridSpec::default()).unwrap();
        let d =
            solve_density(&model, &dynamics, &grid, &InitialSpec::DeltaAt(60.0), 0.0).unwrap();
        let mean = d.mean_b_age(25.0).unwrap();
        assert!((mean - 85.0).abs() < 0.1, "mean {mean}");
        let med = d.quantiles(25.0, &[0.5]).unwrap().alphas[0];
        assert!((med - 85.0).abs() < 0.1, "median {med}");
    }

    #[test]
    fn canonical_quantiles_match_published_interval() {
        let (model, dynamics, grid) = canonical();
        let d =
            solve_density(&model, &dynamics, &grid, &InitialSpec::DeltaAt(60.0), 0.0).unwrap();
        let curve = d.quantiles(25.0, &[0.05, 0.95]).unwrap();
        assert!((curve.alphas[0] - 81.92).abs() < 0.25, "q05 = {}", curve.alphas[0]);
        assert!((curve.alphas[1] - 87.67).abs() < 0.25, "q95 = {}", curve.alphas[1]);
    }

    #[test]
    fn population_hazard_limits() {
        let (model, dynamics, grid) = canonical();
        let d =
            solve_density(&model, &dynamics, &grid, &InitialSpec::DeltaAt(60.0), 0.0).unwrap();
        let early = d.population_hazard(0.05).unwrap();
        assert!((early - 0.005).abs() / 0.005 < 0.05, "early hazard {early}");

        // survivor selection keeps the population hazard below the
        // deterministic-aging hazard
        let late = d.population_hazard(25.0).unwrap();
        assert!(late < model.hazard(85.0), "{late} vs {}", model.hazard(85.0));
    }

    #[test]
    fn zero_vol_population_hazard_tracks_gompertz() {
        let (model, _, _) = canonical();
        let dynamics = BridgeDynamics::new(1.0, 0.0, 60.0, 50.0).unwrap();
        let grid = Grid2D::build(&model, &dynamics, &GridSpec::default()).unwrap();
        let d =
            solve_density(&model, &dynamics, &grid, &InitialSpec::DeltaAt(60.0), 0.0).unwrap();
        for &t in &[5.0, 15.0, 25.0] {
            let got = d.population_hazard(t).unwrap();
            let want = model.hazard(60.0 + t);
            assert!((got - want).abs() / want < 0.01, "t={t}: {got} vs {want}");
        }
    }

    #[test]
    fn quantile_validation() {
        let (model, dynamics, grid) = canonical();
        let d =
            solve_density(&model, &dynamics, &grid, &InitialSpec::DeltaAt(60.0), 0.0).unwrap();
        assert!(matches!(d.quantiles(25.0, &[]), Err(DensityError::EmptyQuantiles)));
        assert!(matches!(d.quantiles(25.0, &[1.2]), Err(DensityError::BadQuantile { .. })));
        assert!(d.quantiles(500.0, &[0.5]).is_err());
    }

    #[test]
    fn band_composes_quantiles_with_policy() {
        let (model, dynamics, grid) = canonical();
        let prefs = Preferences::new(8.0, 0.025, 0.025).unwrap();
        let policy = solve_policy(&prefs, &model, &dynamics, &grid).unwrap();
        let d =
            solve_density(&model, &dynamics, &grid, &InitialSpec::DeltaAt(60.0), 0.0).unwrap();
        let (lo, hi) = spending_band(&policy, &d, 25.0, 0.05, 0.95).unwrap();
        let curve = d.quantiles(25.0, &[0.05, 0.95]).unwrap();
        let lo_direct = policy.spending_rate(85.0, curve.alphas[0]).unwrap();
        let hi_direct = policy.spending_rate(85.0, curve.alphas[1]).unwrap();
        assert_eq!(lo, lo_direct);
        assert_eq!(hi, hi_direct);
        assert!(lo < hi);

        // near the delta start the band collapses onto the point rate
        let (lo0, hi0) = spending_band(&policy, &d, 0.0, 0.05, 0.95).unwrap();
        let point = policy.spending_rate(60.0, 60.0).unwrap();
        assert!((lo0 - point).abs() < 2e-3 && (hi0 - point).abs() < 2e-3);
    }

    #[test]
    fn band_rejects_mismatched_parameters() {
        let (model, dynamics, grid) = canonical();
        let prefs = Preferences::new(8.0, 0.025, 0.025).unwrap();
        let policy = solve_policy(&prefs, &model, &dynamics, &grid).unwrap();
        let other = dynamics.with_sigma(0.6);
        let d = solve_density(&model, &other, &grid, &InitialSpec::DeltaAt(60.0), 0.0).unwrap();
        assert!(matches!(
            spending_band(&policy, &d, 25.0, 0.05, 0.95),
            Err(DensityError::MismatchedParameters)
        ));
    }
}
