//! Expected remaining lifetime `e(t, a)` from the backward equation
//!
//! ```text
//! 1 + e_t + (1 + xi (kappa_t - a)/(T - t)) e_a + (sigma^2/2) e_aa - lambda(a) e = 0
//! ```
//!
//! with `e(T, .) = 1/lambda_T`, the no-hazard value `T - t + 1/lambda_T` on
//! the far-young truncation edge and the constant-hazard tail value
//! `1/lambda(a_max)` on the far-old edge.

use thiserror::Error;

use crate::bridge::{BridgeDynamics, BridgeError};
use crate::hazard::HazardModel;
use crate::pde::{solve_backward, BackwardOperator, Grid2D, PdeError, Source, Surface, SurfaceKind};

#[derive(Debug, Error)]
pub enum ErlError {
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Bridge(#[from] BridgeError),
    #[error("chronological age {c_age} outside [{lo}, {hi}]")]
    AgeOutOfRange { c_age: f64, lo: f64, hi: f64 },
}

/// A solved expected-remaining-lifetime field.
#[derive(Debug, Clone)]
pub struct ErlSurface {
    surface: Surface,
    model: HazardModel,
    dynamics: BridgeDynamics,
}

/// Solves the lifetime equation on `grid`.
pub fn solve_erl(
    model: &HazardModel,
    dynamics: &BridgeDynamics,
    grid: &Grid2D,
) -> Result<ErlSurface, ErlError> {
    dynamics.check_model(model)?;
    let horizon = dynamics.horizon();
    let xi = dynamics.xi();
    let kappa0 = model.kappa0();
    let inv_lambda_t = 1.0 / model.lambda_t();
    let tail_value = 1.0 / model.hazard(grid.a_max());

    let drift = move |t: f64, a: f64| 1.0 + xi * (kappa0 + t - a) / (horizon - t);
    let zeroth = move |a: f64| model.hazard(a);
    let left = move |t: f64| horizon - t + inv_lambda_t;
    let right = move |_t: f64| tail_value;

    let mut surface = Surface::new(grid.clone(), SurfaceKind::Erl);
    let op = BackwardOperator {
        drift: &drift,
        diffusion: 0.5 * dynamics.sigma() * dynamics.sigma(),
        zeroth: &zeroth,
        left: &left,
        right: &right,
    };
    solve_backward(&mut surface, &op, &Source::Linear(&|_, _| 1.0), &|_| inv_lambda_t)?;
    Ok(ErlSurface { surface, model: *model, dynamics: *dynamics })
}

impl ErlSurface {
    /// Expected remaining lifetime at a (chronological age, biological age)
    /// query, bilinearly interpolated.
    pub fn erl_at(&self, c_age: f64, b_age: f64) -> Result<f64, ErlError> {
        let lo = self.model.kappa0();
        let hi = self.model.kappa_t();
        if !(lo - 1e-9..=hi + 1e-9).contains(&c_age) {
            return Err(ErlError::AgeOutOfRange { c_age, lo, hi });
        }
        Ok(self.surface.value_at(c_age - lo, b_age)?)
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    pub fn model(&self) -> &HazardModel {
        &self.model
    }

    pub fn dynamics(&self) -> &BridgeDynamics {
        &self.dynamics
    }
}
