//! Run configuration: canonical defaults, a flat `key = value` config file,
//! and command-line overrides layered on top (flags win).

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::bridge::BridgeDynamics;
use crate::hazard::HazardModel;
use crate::pde::GridSpec;
use crate::policy::Preferences;

/// Environment variable naming a default config file.
pub const CONFIG_ENV: &str = "BIOAGE_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Unreadable { path: PathBuf, source: std::io::Error },
    #[error("config line {line}: expected `key = value`, got `{text}`")]
    BadLine { line: usize, text: String },
    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("config line {line}: cannot parse `{value}` for `{key}`")]
    BadValue { line: usize, key: String, value: String },
    #[error("invalid configuration: {reason}")]
    Invalid { reason: String },
}

/// Everything a command needs; defaults are the canonical calibration
/// (hazard 0.005 at 60 and 1.0 at 110, xi = 1, sigma = 0.3, rho = r = 2.5%).
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub lambda0: f64,
    pub lambda_t: f64,
    pub kappa0: f64,
    pub kappa_t: f64,
    pub xi: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub rho: f64,
    pub r: f64,
    pub da: f64,
    pub dt: f64,
    pub a_min: Option<f64>,
    pub a_max: Option<f64>,
    pub n_paths: u64,
    pub mc_dt: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lambda0: 0.005,
            lambda_t: 1.0,
            kappa0: 60.0,
            kappa_t: 110.0,
            xi: 1.0,
            sigma: 0.3,
            gamma: 8.0,
            rho: 0.025,
            r: 0.025,
            da: 0.1,
            dt: 0.05,
            a_min: None,
            a_max: None,
            n_paths: 100_000,
            mc_dt: 1.0 / 48.0,
            seed: 1,
            out_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    /// Reads a `key = value` file (`#` starts a comment) over the current
    /// values.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Unreadable { path: path.to_path_buf(), source })?;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = raw.split('#').next().unwrap_or("").trim();
            if stripped.is_empty() {
                continue;
            }
            let (key, value) = stripped
                .split_once('=')
                .ok_or_else(|| ConfigError::BadLine { line, text: raw.to_string() })?;
            self.set(key.trim(), value.trim(), line)?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        let bad = |k: &str, v: &str| ConfigError::BadValue {
            line,
            key: k.to_string(),
            value: v.to_string(),
        };
        let parse_f = |k: &str, v: &str| v.parse::<f64>().map_err(|_| bad(k, v));
        let parse_u = |k: &str, v: &str| v.parse::<u64>().map_err(|_| bad(k, v));
        match key {
            "lambda0" => self.lambda0 = parse_f(key, value)?,
            "lambda_t" => self.lambda_t = parse_f(key, value)?,
            "kappa0" => self.kappa0 = parse_f(key, value)?,
            "kappa_t" => self.kappa_t = parse_f(key, value)?,
            "xi" => self.xi = parse_f(key, value)?,
            "sigma" => self.sigma = parse_f(key, value)?,
            "gamma" => self.gamma = parse_f(key, value)?,
            "rho" => self.rho = parse_f(key, value)?,
            "r" => self.r = parse_f(key, value)?,
            "da" => self.da = parse_f(key, value)?,
            "dt" => self.dt = parse_f(key, value)?,
            "a_min" => self.a_min = Some(parse_f(key, value)?),
            "a_max" => self.a_max = Some(parse_f(key, value)?),
            "n_paths" => self.n_paths = parse_u(key, value)?,
            "mc_dt" => self.mc_dt = parse_f(key, value)?,
            "seed" => self.seed = parse_u(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
        }
        Ok(())
    }

    pub fn model(&self) -> Result<HazardModel, ConfigError> {
        HazardModel::from_pinned(self.lambda0, self.lambda_t, self.kappa0, self.kappa_t)
            .map_err(|e| ConfigError::Invalid { reason: e.to_string() })
    }

    pub fn dynamics(&self) -> Result<BridgeDynamics, ConfigError> {
        BridgeDynamics::new(self.xi, self.sigma, self.kappa0, self.kappa_t - self.kappa0)
            .map_err(|e| ConfigError::Invalid { reason: e.to_string() })
    }

    pub fn preferences(&self) -> Result<Preferences, ConfigError> {
        Preferences::new(self.gamma, self.rho, self.r)
            .map_err(|e| ConfigError::Invalid { reason: e.to_string() })
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec { da: self.da, dt: self.dt, a_min: self.a_min, a_max: self.a_max, ..GridSpec::default() }
    }

    /// Validates the numeric knobs that are not covered by the domain
    /// constructors.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.da > 0.0 && self.dt > 0.0) {
            return Err(ConfigError::Invalid {
                reason: format!("grid steps must be positive (da={}, dt={})", self.da, self.dt),
            });
        }
        if !(self.mc_dt > 0.0) {
            return Err(ConfigError::Invalid {
                reason: format!("mc_dt must be positive (got {})", self.mc_dt),
            });
        }
        if self.n_paths == 0 {
            return Err(ConfigError::Invalid { reason: "n_paths must be positive".into() });
        }
        self.model()?;
        self.dynamics()?;
        self.preferences()?;
        Ok(())
    }
}
