//! Lifecycle consumption and mortality under stochastic biological age.
//!
//! An individual's hazard follows a Gompertz law in *biological* age, which
//! wanders around chronological age as a generalized Brownian bridge pinned
//! at a terminal date. The crate solves the three fields this induces on a
//! shared finite-difference engine:
//!
//! * [`erl`] — expected remaining lifetime, backward in time;
//! * [`policy`] — the optimal CRRA (and logarithmic) spending rate;
//! * [`density`] — the survivor sub-density, forward in time, with
//!   quantiles, spending bands and volatility calibration on top;
//!
//! together with [`mc`], exact-transition Monte Carlo used to cross-check
//! every solver, and a CSV-emitting command layer behind the `bioage`
//! binary.

pub mod bridge;
pub mod commands;
pub mod config;
pub mod density;
pub mod erl;
pub mod hazard;
pub mod mc;
pub mod pde;
pub mod policy;
mod quad;

pub use bridge::{path_rng, BridgeDynamics, SimulatedPath};
pub use density::{
    calibrate_sigma, solve_density, spending_band, CalibrationObservation, CalibrationResult,
    InitialSpec, QuantileCurve, SubDensitySurface,
};
pub use erl::{solve_erl, ErlSurface};
pub use hazard::HazardModel;
pub use mc::{mc_erl, mc_survival, mc_survivor_quantiles, McEstimate, QuantileEstimate};
pub use pde::{Grid2D, GridSpec, Surface, SurfaceKind};
pub use policy::{
    characteristics_approx, deterministic_plan, solve_log_policy, solve_policy, terminal_f,
    CharacteristicsApprox, DeterministicPlan, LogPolicySurface, PolicySurface, Preferences,
};
