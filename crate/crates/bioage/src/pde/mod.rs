//! Shared finite-difference infrastructure for the three solvers.
//!
//! The grid is uniform in biological age and uniform in time away from the
//! pinning horizon; the drift `1 + xi (kappa_t - a)/(T - t)` blows up there,
//! so the final stretch of time levels shrinks geometrically. Advection is
//! discretized first-order upwind and treated implicitly, diffusion and
//! zeroth-order terms get Crank-Nicolson weights, and nonlinear sources are
//! lagged through Picard iteration.

mod backward;
mod forward;
mod residual;
mod tridiag;

pub use backward::{solve_backward, step_backward, BackwardOperator, Source, PICARD_MAX, PICARD_TOL};
pub use forward::{level_mass, solve_forward, step_forward_conservative, ForwardOperator};
pub use residual::{residual, EquationSpec};
pub use tridiag::solve_in_place as tridiag_solve;

use thiserror::Error;

use crate::bridge::BridgeDynamics;
use crate::hazard::HazardModel;

#[derive(Debug, Error)]
pub enum PdeError {
    #[error("invalid grid spec: {reason}")]
    InvalidSpec { reason: String },
    #[error("truncation [{a_min}, {a_max}] too narrow for pins at {kappa0} and {kappa_t}")]
    TruncationTooNarrow { a_min: f64, a_max: f64, kappa0: f64, kappa_t: f64 },
    #[error("time refinement violated near the horizon: xi*dt/(T-t) = {ratio:.3} at t = {t:.4}")]
    DriftRefinement { t: f64, ratio: f64 },
    #[error("Picard iteration stalled at t = {t:.4}: residual {residual:.3e} after {iterations} iterations")]
    PicardNoConvergence { t: f64, iterations: usize, residual: f64 },
    #[error("density went negative at t = {t:.4}: min {min:.3e} beyond floor {floor:.3e}")]
    NegativeDensity { t: f64, min: f64, floor: f64 },
    #[error("query (t = {t}, a = {a}) lies outside the grid")]
    OutOfGrid { t: f64, a: f64 },
}

/// Knobs for building a [`Grid2D`]; `None` truncation bounds fall back to
/// `kappa0 - 40` and `kappa_T + 30`.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub da: f64,
    pub dt: f64,
    pub a_min: Option<f64>,
    pub a_max: Option<f64>,
    /// Length of the refined stretch before the horizon.
    pub tail: f64,
    /// Smallest refined step; the last step onto the horizon has this size.
    pub dt_min: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { da: 0.1, dt: 0.05, a_min: None, a_max: None, tail: 2.0, dt_min: 1e-3 }
    }
}

impl GridSpec {
    pub fn with_resolution(da: f64, dt: f64) -> Self {
        Self { da, dt, ..Self::default() }
    }
}

/// Tensor grid over (time, biological age).
#[derive(Debug, Clone)]
pub struct Grid2D {
    a_nodes: Vec<f64>,
    t_nodes: Vec<f64>,
    da: f64,
    uniform_end: f64,
}

impl Grid2D {
    pub fn build(
        model: &HazardModel,
        dynamics: &BridgeDynamics,
        spec: &GridSpec,
    ) -> Result<Self, PdeError> {
        if !(spec.da > 0.0 && spec.dt > 0.0 && spec.dt_min > 0.0 && spec.tail > 0.0) {
            return Err(PdeError::InvalidSpec {
                reason: format!(
                    "steps must be positive (da={}, dt={}, dt_min={}, tail={})",
                    spec.da, spec.dt, spec.dt_min, spec.tail
                ),
            });
        }
        let horizon = dynamics.horizon();
        let a_min = spec.a_min.unwrap_or(model.kappa0() - 40.0);
        let a_max = spec.a_max.unwrap_or(model.kappa_t() + 30.0);
        if !(a_min < model.kappa0() - 30.0 && a_max > model.kappa_t() + 20.0) {
            return Err(PdeError::TruncationTooNarrow {
                a_min,
                a_max,
                kappa0: model.kappa0(),
                kappa_t: model.kappa_t(),
            });
        }
        let n_a = ((a_max - a_min) / spec.da).round() as usize + 1;
        let a_nodes: Vec<f64> = (0..n_a).map(|j| a_min + j as f64 * spec.da).collect();

        let tail = spec.tail.min(horizon / 2.0);
        let mut t_nodes = Vec::new();
        let mut t = 0.0;
        while t < horizon - tail - 1e-9 {
            t_nodes.push(t);
            t += spec.dt;
        }
        t_nodes.push(horizon - tail);
        // geometric shrink toward the horizon keeps xi*dt/(T-t) bounded
        let theta = spec.dt / tail;
        let mut delta = tail / (1.0 + theta);
        while delta > spec.dt_min {
            t_nodes.push(horizon - delta);
            delta /= 1.0 + theta;
        }
        t_nodes.push(horizon);

        let grid = Self { a_nodes, t_nodes, da: spec.da, uniform_end: horizon - tail };
        // every step except the final jump onto the pin must satisfy the
        // drift-refinement bound at its lower level
        for w in grid.t_nodes.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi >= horizon {
                break;
            }
            let ratio = dynamics.xi() * (hi - lo) / (horizon - lo);
            if ratio > 1.0 + 1e-9 {
                return Err(PdeError::DriftRefinement { t: lo, ratio });
            }
        }
        Ok(grid)
    }

    pub fn a_nodes(&self) -> &[f64] {
        &self.a_nodes
    }

    pub fn t_nodes(&self) -> &[f64] {
        &self.t_nodes
    }

    pub fn da(&self) -> f64 {
        self.da
    }

    pub fn n_a(&self) -> usize {
        self.a_nodes.len()
    }

    pub fn n_t(&self) -> usize {
        self.t_nodes.len()
    }

    pub fn a_min(&self) -> f64 {
        self.a_nodes[0]
    }

    pub fn a_max(&self) -> f64 {
        *self.a_nodes.last().unwrap()
    }

    pub fn t_end(&self) -> f64 {
        *self.t_nodes.last().unwrap()
    }

    /// Last time covered by the uniform step, before the refined stretch.
    pub fn uniform_end(&self) -> f64 {
        self.uniform_end
    }

    /// Index of the level holding exactly time `t`, if there is one.
    pub fn level_at(&self, t: f64) -> Option<usize> {
        let i = self.t_nodes.partition_point(|&x| x < t - 1e-9);
        (i < self.t_nodes.len() && (self.t_nodes[i] - t).abs() < 1e-9).then_some(i)
    }

    /// Lower level index and interpolation weight for an arbitrary time.
    pub fn bracket_t(&self, t: f64) -> Result<(usize, f64), PdeError> {
        if t < self.t_nodes[0] - 1e-9 || t > self.t_end() + 1e-9 {
            return Err(PdeError::OutOfGrid { t, a: f64::NAN });
        }
        let i = self.t_nodes.partition_point(|&x| x <= t);
        if i == 0 {
            return Ok((0, 0.0));
        }
        if i == self.t_nodes.len() {
            return Ok((i - 2, 1.0));
        }
        let lo = i - 1;
        let span = self.t_nodes[i] - self.t_nodes[lo];
        Ok((lo, ((t - self.t_nodes[lo]) / span).clamp(0.0, 1.0)))
    }

    /// Lower node index and interpolation weight for a biological age.
    pub fn bracket_a(&self, a: f64) -> Result<(usize, f64), PdeError> {
        if a < self.a_min() - 1e-9 || a > self.a_max() + 1e-9 {
            return Err(PdeError::OutOfGrid { t: f64::NAN, a });
        }
        let x = (a - self.a_min()) / self.da;
        let j = (x.floor() as usize).min(self.n_a() - 2);
        Ok((j, (x - j as f64).clamp(0.0, 1.0)))
    }
}

/// Which field a surface stores; the sign constraints differ per kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceKind {
    Erl,
    PolicyF,
    PolicyH,
    DensityG,
}

/// A solved (or in-progress) field over the grid, one row per time level.
#[derive(Debug, Clone)]
pub struct Surface {
    grid: Grid2D,
    kind: SurfaceKind,
    values: Vec<Vec<f64>>,
}

impl Surface {
    pub fn new(grid: Grid2D, kind: SurfaceKind) -> Self {
        let values = vec![vec![0.0; grid.n_a()]; grid.n_t()];
        Self { grid, kind, values }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn level(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn level_mut(&mut self, i: usize) -> &mut Vec<f64> {
        &mut self.values[i]
    }

    /// Bilinear interpolation in (t, a).
    pub fn value_at(&self, t: f64, a: f64) -> Result<f64, PdeError> {
        let (i, wt) = self.grid.bracket_t(t)?;
        let (j, wa) = self.grid.bracket_a(a)?;
        let i1 = (i + 1).min(self.grid.n_t() - 1);
        let row0 = &self.values[i];
        let row1 = &self.values[i1];
        let v0 = row0[j] * (1.0 - wa) + row0[j + 1] * wa;
        let v1 = row1[j] * (1.0 - wa) + row1[j + 1] * wa;
        Ok(v0 * (1.0 - wt) + v1 * wt)
    }

    /// Row interpolated between the two levels bracketing `t`.
    pub fn row_at(&self, t: f64) -> Result<Vec<f64>, PdeError> {
        let (i, wt) = self.grid.bracket_t(t)?;
        let i1 = (i + 1).min(self.grid.n_t() - 1);
        Ok(self.values[i]
            .iter()
            .zip(&self.values[i1])
            .map(|(lo, hi)| lo * (1.0 - wt) + hi * wt)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (HazardModel, BridgeDynamics) {
        (
            HazardModel::from_pinned(0.005, 1.0, 60.0, 110.0).unwrap(),
            BridgeDynamics::new(1.0, 0.3, 60.0, 50.0).unwrap(),
        )
    }

    #[test]
    fn default_grid_dimensions() {
        let (model, dynamics) = setup();
        let grid = Grid2D::build(&model, &dynamics, &GridSpec::default()).unwrap();
        assert_eq!(grid.n_a(), 1201);
        assert_eq!(grid.a_min(), 20.0);
        assert_eq!(grid.a_max(), 140.0);
        assert_eq!(grid.t_end(), 50.0);
        // uniform region then a refined tail
        assert!(grid.n_t() > 960);
        let dts: Vec<f64> = grid.t_nodes().windows(2).map(|w| w[1] - w[0]).collect();
        assert!(dts.iter().all(|&d| d > 0.0));
        assert!(*dts.last().unwrap() <= 2e-3);
    }

    #[test]
    fn refinement_bound_holds_at_every_step() {
        let (model, _) = setup();
        let dynamics = BridgeDynamics::new(2.0, 0.9, 60.0, 50.0).unwrap();
        let grid = Grid2D::build(&model, &dynamics, &GridSpec::default()).unwrap();
        for w in grid.t_nodes().windows(2) {
            if w[1] >= 50.0 {
                continue;
            }
            let ratio = 2.0 * (w[1] - w[0]) / (50.0 - w[0]);
            assert!(ratio <= 1.0 + 1e-9, "ratio {ratio} at t={}", w[0]);
        }
    }

    #[test]
    fn rejects_narrow_truncation() {
        let (model, dynamics) = setup();
        let spec = GridSpec { a_min: Some(40.0), ..GridSpec::default() };
        assert!(matches!(
            Grid2D::build(&model, &dynamics, &spec),
            Err(PdeError::TruncationTooNarrow { .. })
        ));
    }

    #[test]
    fn level_lookup_and_interpolation() {
        let (model, dynamics) = setup();
        let grid = Grid2D::build(&model, &dynamics, &GridSpec::default()).unwrap();
        assert_eq!(grid.level_at(0.0), Some(0));
        assert!(grid.level_at(25.0).is_some());
        assert!(grid.level_at(25.013).is_none());
        let (j, w) = grid.bracket_a(60.05).unwrap();
        assert_eq!(j, 400);
        assert!((w - 0.5).abs() < 1e-9);
        assert!(grid.bracket_a(500.0).is_err());
    }

    #[test]
    fn bilinear_reproduces_plane() {
        let (model, dynamics) = setup();
        let grid = Grid2D::build(&model, &dynamics, &GridSpec::default()).unwrap();
        let mut s = Surface::new(grid, SurfaceKind::Erl);
        for i in 0..s.grid().n_t() {
            let t = s.grid().t_nodes()[i];
            let row: Vec<f64> = s.grid().a_nodes().iter().map(|a| 2.0 * t - 0.5 * a).collect();
            *s.level_mut(i) = row;
        }
        let v = s.value_at(12.3, 77.77).unwrap();
        assert!((v - (2.0 * 12.3 - 0.5 * 77.77)).abs() < 1e-9);
    }
}
