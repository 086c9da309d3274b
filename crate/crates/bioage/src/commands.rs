//! Command layer behind the CLI binary: tables, bands, density slices,
//! simulation summaries, calibration reports. Every command writes
//! RFC-4180-style CSV (LF endings, `.` decimals) atomically and is
//! deterministic given the configuration and seed.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::density::{
    calibrate_sigma, solve_density, CalibrationError, CalibrationObservation, DensityError,
    InitialSpec,
};
use crate::erl::{solve_erl, ErlError};
use crate::hazard::HazardModel;
use crate::mc::{mc_erl, mc_survival, mc_survivor_quantiles, McError};
use crate::pde::{Grid2D, PdeError};
use crate::policy::{characteristics_approx, solve_policy, PolicyError};

/// Command failures, bucketed by process exit code: 1 solver trouble,
/// 2 invalid input, 3 stability violation, 4 calibration bracket failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Stability(String),
    #[error("{0}")]
    Bracket(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(_) | CliError::Io(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Stability(_) => 3,
            CliError::Bracket(_) => 4,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<PdeError> for CliError {
    fn from(e: PdeError) -> Self {
        match e {
            PdeError::OutOfGrid { .. } => CliError::Invalid(e.to_string()),
            other => CliError::Solver(other.to_string()),
        }
    }
}

impl From<PolicyError> for CliError {
    fn from(e: PolicyError) -> Self {
        match e {
            PolicyError::Unstable { .. } => CliError::Stability(e.to_string()),
            PolicyError::Pde(inner) => inner.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<ErlError> for CliError {
    fn from(e: ErlError) -> Self {
        match e {
            ErlError::Pde(inner) => inner.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<DensityError> for CliError {
    fn from(e: DensityError) -> Self {
        match e {
            DensityError::Pde(inner) => inner.into(),
            DensityError::Policy(inner) => inner.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<CalibrationError> for CliError {
    fn from(e: CalibrationError) -> Self {
        match e {
            CalibrationError::InvalidBracket { .. } => CliError::Bracket(e.to_string()),
            CalibrationError::Density(inner) => inner.into(),
            CalibrationError::Policy(inner) => inner.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<McError> for CliError {
    fn from(e: McError) -> Self {
        match e {
            McError::Bridge(inner) => CliError::Invalid(inner.to_string()),
            other => CliError::Solver(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<crate::bridge::BridgeError> for CliError {
    fn from(e: crate::bridge::BridgeError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Erl,
    Spending,
}

fn build_grid(cfg: &RunConfig) -> Result<Grid2D, CliError> {
    let model = cfg.model()?;
    let dynamics = cfg.dynamics()?;
    Ok(Grid2D::build(&model, &dynamics, &cfg.grid_spec())?)
}

/// Writes through a temp file in the destination directory so readers never
/// observe a partial file.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(())
}

fn table_ages(model: &HazardModel) -> (Vec<f64>, Vec<f64>) {
    let k0 = model.kappa0();
    let b_ages: Vec<f64> = (0..11).map(|i| k0 - 15.0 + 5.0 * i as f64).collect();
    let c_ages: Vec<f64> = (0..8).map(|i| k0 + 5.0 * i as f64).collect();
    (b_ages, c_ages)
}

/// Lifetime or spending table over the standard age block.
pub fn table(cfg: &RunConfig, which: TableKind, out: Option<&Path>) -> Result<PathBuf, CliError> {
    let model = cfg.model()?;
    let dynamics = cfg.dynamics()?;
    let grid = build_grid(cfg)?;
    let (b_ages, c_ages) = table_ages(&model);

    let mut csv = String::from("b_age");
    for c in &c_ages {
        let _ = write!(csv, ",c{c:.0}");
    }
    csv.push('\n');

    match which {
        TableKind::Erl => {
            let surface = solve_erl(&model, &dynamics, &grid)?;
            for &b in &b_ages {
                let _ = write!(csv, "{b:.0}");
                for &c in &c_ages {
                    let _ = write!(csv, ",{:.2}", surface.erl_at(c, b)?);
                }
                csv.push('\n');
            }
        }
        TableKind::Spending => {
            let prefs = cfg.preferences()?;
            let surface = solve_policy(&prefs, &model, &dynamics, &grid)?;
            for &b in &b_ages {
                let _ = write!(csv, "{b:.0}");
                for &c in &c_ages {
                    let _ = write!(csv, ",{:.3}", 100.0 * surface.spending_rate(c, b)?);
                }
                csv.push('\n');
            }
        }
    }

    let name = match which {
        TableKind::Erl => "table_erl.csv",
        TableKind::Spending => "table_spending.csv",
    };
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.out_dir.join(name));
    write_atomic(&path, &csv)?;
    Ok(path)
}

/// Survivor-age band and the induced spending band over a time grid.
pub fn band(
    cfg: &RunConfig,
    t_max: f64,
    t_step: f64,
    out: Option<&Path>,
) -> Result<PathBuf, CliError> {
    if !(t_step > 0.0) || t_max < 0.0 {
        return Err(CliError::Invalid(format!(
            "band needs t_step > 0 and t_max >= 0 (got {t_step}, {t_max})"
        )));
    }
    let model = cfg.model()?;
    let dynamics = cfg.dynamics()?;
    let prefs = cfg.preferences()?;
    let grid = build_grid(cfg)?;
    let policy = solve_policy(&prefs, &model, &dynamics, &grid)?;
    let density =
        solve_density(&model, &dynamics, &grid, &InitialSpec::DeltaAt(model.kappa0()), 0.0)?;

    let mut csv = String::from("t,c_age,b_q05,b_q50,b_q95,spend_q05,spend_q50,spend_q95\n");
    let horizon = dynamics.horizon();
    let mut t = 0.0;
    while t <= t_max + 1e-9 && t < horizon {
        let curve = density.quantiles(t, &[0.05, 0.5, 0.95])?;
        let c_age = model.kappa0() + t;
        let spends: Vec<f64> = curve
            .alphas
            .iter()
            .map(|&b| policy.spending_rate(c_age, b).map(|v| 100.0 * v))
            .collect::<Result<_, _>>()?;
        let _ = write!(
            csv,
            "{t:.2},{c_age:.2},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}\n",
            curve.alphas[0], curve.alphas[1], curve.alphas[2], spends[0], spends[1], spends[2]
        );
        t += t_step;
    }

    let path = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.out_dir.join("band.csv"));
    write_atomic(&path, &csv)?;
    Ok(path)
}

/// Survivor sub-density slices at the requested chronological ages.
pub fn density_slices(
    cfg: &RunConfig,
    c_ages: Option<Vec<f64>>,
    out: Option<&Path>,
) -> Result<PathBuf, CliError> {
    let model = cfg.model()?;
    let dynamics = cfg.dynamics()?;
    let grid = build_grid(cfg)?;
    let ages = c_ages.unwrap_or_else(|| {
        vec![model.kappa0() + 5.0, model.kappa0() + 15.0, model.kappa0() + 25.0]
    });
    for &c in &ages {
        if c < model.kappa0() || c >= model.kappa_t() {
            return Err(CliError::Invalid(format!(
                "slice age {c} outside [{}, {})",
                model.kappa0(),
                model.kappa_t()
            )));
        }
    }
    let density =
        solve_density(&model, &dynamics, &grid, &InitialSpec::DeltaAt(dynamics.initial_age()), 0.0)?;

    let mut csv = String::from("b_age");
    for c in &ages {
        let _ = write!(csv, ",c{c:.0}");
    }
    csv.push('\n');
    let rows: Vec<Vec<f64>> = ages
        .iter()
        .map(|&c| density.surface().row_at(c - model.kappa0()))
        .collect::<Result<_, _>>()?;
    for (j, &a) in grid.a_nodes().iter().enumerate() {
        let _ = write!(csv, "{a:.2}");
        for row in &rows {
            let _ = write!(csv, ",{:.6e}", row[j]);
        }
        csv.push('\n');
    }

    let path = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.out_dir.join("density.csv"));
    write_atomic(&path, &csv)?;
    Ok(path)
}

/// Expected remaining lifetime at one age pair, printed in years.
pub fn erl_query(cfg: &RunConfig, c_age: f64, b_age: f64) -> Result<f64, CliError> {
    let model = cfg.model()?;
    let dynamics = cfg.dynamics()?;
    let grid = build_grid(cfg)?;
    let surface = solve_erl(&model, &dynamics, &grid)?;
    Ok(surface.erl_at(c_age, b_age)?)
}

/// Optimal spending rate at one age pair, in percent of wealth per year.
pub fn spend_query(cfg: &RunConfig, c_age: f64, b_age: f64) -> Result<f64, CliError> {
    let model = cfg.model()?;
    let dynamics = cfg.dynamics()?;
    let prefs = cfg.preferences()?;
    let grid = build_grid(cfg)?;
    let surface = solve_policy(&prefs, &model, &dynamics, &grid)?;
    Ok(100.0 * surface.spending_rate(c_age, b_age)?)
}

/// Monte Carlo summary (and optionally one row per path).
pub fn simulate(
    cfg: &RunConfig,
    paths_file: Option<&Path>,
    out: Option<&Path>,
) -> Result<PathBuf, CliError> {
    let model = cfg.model()?;
    let dynamics = cfg.dynamics()?;
    let horizon = dynamics.horizon();
    let t_obs = 25.0_f64.min(0.5 * horizon);
    let k0 = model.kappa0();

    let erl = mc_erl(&model, &dynamics, (0.0, dynamics.initial_age()), cfg.n_paths, cfg.mc_dt, cfg.seed)?;
    let surv = mc_survival(&model, &dynamics, t_obs, cfg.n_paths, cfg.mc_dt, cfg.seed)?;
    let quants =
        mc_survivor_quantiles(&model, &dynamics, t_obs, &[0.05, 0.5, 0.95], cfg.n_paths, cfg.mc_dt, cfg.seed)?;

    let mut csv = String::from("metric,value,std_error,n_paths,seed\n");
    let _ = write!(
        csv,
        "erl_{k0:.0}_{a0:.0},{:.6},{:.6},{},{}\n",
        erl.value,
        erl.std_error,
        cfg.n_paths,
        cfg.seed,
        a0 = dynamics.initial_age()
    );
    let _ = write!(
        csv,
        "survival_t{t_obs:.0},{:.6},{:.6},{},{}\n",
        surv.value, surv.std_error, cfg.n_paths, cfg.seed
    );
    for q in &quants {
        let _ = write!(
            csv,
            "b_q{:02.0}_t{t_obs:.0},{:.6},{:.6},{},{}\n",
            100.0 * q.q,
            q.value,
            q.std_error,
            cfg.n_paths,
            cfg.seed
        );
    }

    if let Some(pfile) = paths_file {
        let mut rows = String::from("path,b_age_t25,death_time\n");
        let steps_to_obs = (t_obs / cfg.mc_dt).round() as usize;
        for i in 0..cfg.n_paths {
            let mut rng = crate::bridge::path_rng(cfg.seed, i);
            let path = dynamics.simulate_path(&model, cfg.mc_dt, 1e9, &mut rng)?;
            let zeta = path.death_time.expect("unbounded horizon always ends in death");
            if path.b_ages.len() > steps_to_obs {
                let _ = write!(rows, "{i},{:.6},{zeta:.6}\n", path.b_ages[steps_to_obs]);
            } else {
                let _ = write!(rows, "{i},,{zeta:.6}\n");
            }
        }
        write_atomic(pfile, &rows)?;
    }

    let path = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.out_dir.join("simulate.csv"));
    write_atomic(&path, &csv)?;
    Ok(path)
}

/// Parses `c_age,rate_lo,rate_hi` rows (rates as fractions of wealth).
pub fn read_ci_file(path: &Path) -> Result<Vec<CalibrationObservation>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("cannot read CI file {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if idx == 0 && fields[0].parse::<f64>().is_err() {
            continue; // header
        }
        if fields.len() != 3 {
            return Err(CliError::Invalid(format!(
                "CI file line {}: expected `c_age,rate_lo,rate_hi`, got `{raw}`",
                idx + 1
            )));
        }
        let mut nums = [0.0; 3];
        for (k, f) in fields.iter().enumerate() {
            nums[k] = f.parse::<f64>().map_err(|_| {
                CliError::Invalid(format!("CI file line {}: bad number `{f}`", idx + 1))
            })?;
        }
        out.push(CalibrationObservation { c_age: nums[0], rate_lo: nums[1], rate_hi: nums[2] });
    }
    Ok(out)
}

/// Calibrates the age volatility from a two-row CI file.
pub fn calibrate(
    cfg: &RunConfig,
    ci_path: &Path,
    bracket: (f64, f64),
    out: Option<&Path>,
) -> Result<(f64, PathBuf), CliError> {
    let observed = read_ci_file(ci_path)?;
    if observed.len() != 2 {
        return Err(CliError::Invalid(format!(
            "calibration needs exactly two CI rows, found {}",
            observed.len()
        )));
    }
    let model = cfg.model()?;
    let dynamics = cfg.dynamics()?;
    let prefs = cfg.preferences()?;
    let grid = build_grid(cfg)?;
    let result = calibrate_sigma(&observed, &prefs, &model, &dynamics, &grid, bracket)?;

    let mut csv = String::from("key,value\n");
    let _ = write!(csv, "sigma_hat,{:.6}\n", result.sigma_hat);
    let _ = write!(csv, "objective,{:.6e}\n", result.objective);
    let _ = write!(csv, "evaluations,{}\n", result.evaluations);
    for f in &result.fitted {
        let _ = write!(csv, "fit_rate_lo_c{:.0},{:.6}\n", f.c_age, f.rate_lo);
        let _ = write!(csv, "fit_rate_hi_c{:.0},{:.6}\n", f.c_age, f.rate_hi);
    }
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.out_dir.join("calibration.csv"));
    write_atomic(&path, &csv)?;
    Ok((result.sigma_hat, path))
}

/// Characteristics-approximation spending curve along the deterministic age
/// path.
pub fn approx(cfg: &RunConfig, a0: Option<f64>, out: Option<&Path>) -> Result<PathBuf, CliError> {
    let model = cfg.model()?;
    let dynamics = cfg.dynamics()?;
    let prefs = cfg.preferences()?;
    let a0 = a0.unwrap_or_else(|| dynamics.initial_age());
    let curve = characteristics_approx(&prefs, &model, &dynamics, a0)?;

    let mut csv = String::from("t,c_age,b_age,spend_pct\n");
    let horizon = dynamics.horizon();
    let mut t = 0.0;
    while t <= horizon + 1e-9 {
        let _ = write!(
            csv,
            "{t:.2},{:.2},{:.4},{:.4}\n",
            model.kappa0() + t,
            curve.age_at(t.min(horizon)),
            100.0 * curve.rate_at(t.min(horizon))
        );
        t += 1.0;
    }
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.out_dir.join("approx.csv"));
    write_atomic(&path, &csv)?;
    Ok(path)
}
