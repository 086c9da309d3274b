//! Gompertz mortality law expressed in biological-age coordinates.
//!
//! The hazard rate at biological age `a` is
//!
//! ```text
//! lambda(a) = lambda0 * (lambdaT / lambda0)^((a - kappa0) / (kappaT - kappa0))
//! ```
//!
//! which is the classical Gompertz form `(1/b) * exp((a - m)/b)` with the mode
//! `m` and dispersion `b` recovered from the two pinned endpoints. Both
//! parameterizations are carried so either can be queried.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HazardError {
    #[error("hazard pins must be positive (got lambda0={lambda0}, lambdaT={lambda_t})")]
    NonPositivePin { lambda0: f64, lambda_t: f64 },
    #[error("terminal pin must exceed the initial pin (lambda0={lambda0}, lambdaT={lambda_t}); the dispersion is undefined otherwise")]
    PinsNotIncreasing { lambda0: f64, lambda_t: f64 },
    #[error("age span must be positive (kappa0={kappa0}, kappaT={kappa_t})")]
    EmptyAgeSpan { kappa0: f64, kappa_t: f64 },
    #[error("dispersion must be positive (b={b})")]
    NonPositiveDispersion { b: f64 },
}

/// Gompertz mortality in biological age, pinned at two (age, hazard) points.
///
/// Immutable after construction; cheap to copy and safe to share across
/// threads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HazardModel {
    lambda0: f64,
    lambda_t: f64,
    kappa0: f64,
    kappa_t: f64,
    m: f64,
    b: f64,
}

impl HazardModel {
    /// Builds the model from its pinned endpoints: hazard `lambda0` at age
    /// `kappa0` and hazard `lambda_t` at age `kappa_t`.
    pub fn from_pinned(
        lambda0: f64,
        lambda_t: f64,
        kappa0: f64,
        kappa_t: f64,
    ) -> Result<Self, HazardError> {
        if !(lambda0 > 0.0) || !(lambda_t > 0.0) {
            return Err(HazardError::NonPositivePin { lambda0, lambda_t });
        }
        if lambda_t <= lambda0 {
            return Err(HazardError::PinsNotIncreasing { lambda0, lambda_t });
        }
        if !(kappa_t > kappa0) {
            return Err(HazardError::EmptyAgeSpan { kappa0, kappa_t });
        }
        let b = (kappa_t - kappa0) / (lambda_t / lambda0).ln();
        let m = kappa0 - b * (b * lambda0).ln();
        Ok(Self { lambda0, lambda_t, kappa0, kappa_t, m, b })
    }

    /// Builds the model from the actuarial `(m, b)` parameters, pinning the
    /// endpoints at `kappa0` and `kappa_t`.
    pub fn from_gompertz(m: f64, b: f64, kappa0: f64, kappa_t: f64) -> Result<Self, HazardError> {
        if !(b > 0.0) {
            return Err(HazardError::NonPositiveDispersion { b });
        }
        if !(kappa_t > kappa0) {
            return Err(HazardError::EmptyAgeSpan { kappa0, kappa_t });
        }
        let lambda0 = ((kappa0 - m) / b).exp() / b;
        let lambda_t = ((kappa_t - m) / b).exp() / b;
        Ok(Self { lambda0, lambda_t, kappa0, kappa_t, m, b })
    }

    /// Instantaneous hazard at biological age `a`.
    ///
    /// Defined for all real `a`; decays to zero as `a -> -inf` and grows
    /// without bound as `a -> +inf`, which the PDE truncation relies on.
    pub fn hazard(&self, a: f64) -> f64 {
        self.lambda0 * (self.lambda_t / self.lambda0).powf((a - self.kappa0) / (self.kappa_t - self.kappa0))
    }

    /// Survival probability over `s` years of deterministic aging, where
    /// biological age tracks `kappa0 + s` exactly: `exp(b lambda0 (1 - e^{s/b}))`,
    /// computed through `exp_m1` so near-flat laws (huge `b`) do not cancel.
    pub fn gompertz_survival(&self, s: f64) -> f64 {
        (-self.b * self.lambda0 * (s / self.b).exp_m1()).exp()
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn lambda_t(&self) -> f64 {
        self.lambda_t
    }

    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    pub fn kappa_t(&self) -> f64 {
        self.kappa_t
    }

    /// Modal age at death of the underlying Gompertz law.
    pub fn mode(&self) -> f64 {
        self.m
    }

    /// Dispersion of the underlying Gompertz law, in years.
    pub fn dispersion(&self) -> f64 {
        self.b
    }

    /// Length of the aging horizon `kappaT - kappa0`.
    pub fn horizon(&self) -> f64 {
        self.kappa_t - self.kappa0
    }

    /// Chronological age at elapsed time `t`, capped at `kappaT` where aging
    /// stops.
    pub fn chron_age(&self, t: f64) -> f64 {
        (self.kappa0 + t).min(self.kappa_t)
    }
}
