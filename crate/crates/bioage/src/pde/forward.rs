//! Conservative forward stepping for the survivor sub-density,
//!
//! ```text
//! g_t + d/da( drift(t,a) g ) - diffusion g_aa + kill(a) g = 0.
//! ```
//!
//! Advection uses donor-cell upwind fluxes assembled implicitly at the new
//! level; diffusion and the kill term carry Crank-Nicolson weights. Interface
//! fluxes vanish at both truncation ends, so with `kill = 0` the discrete
//! mass `da * sum(g)` is conserved to machine precision.

use super::{tridiag, PdeError, Surface};

/// Coefficients of one forward (divergence-form) equation.
pub struct ForwardOperator<'a> {
    pub drift: &'a dyn Fn(f64, f64) -> f64,
    /// Diffusion coefficient sigma^2 / 2.
    pub diffusion: f64,
    pub kill: &'a dyn Fn(f64) -> f64,
}

/// Fills `level + 1` from the already-populated `level`.
pub fn step_forward_conservative(
    surface: &mut Surface,
    level: usize,
    op: &ForwardOperator,
) -> Result<(), PdeError> {
    let grid = surface.grid().clone();
    let n = grid.n_a();
    let da = grid.da();
    let t1 = grid.t_nodes()[level + 1];
    let dt = t1 - grid.t_nodes()[level];
    let cd = op.diffusion / (da * da);
    let a = grid.a_nodes();

    let old = surface.level(level).to_vec();

    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];

    for j in 0..n {
        let z = (op.kill)(a[j]);
        let interior_l = j > 0;
        let interior_r = j + 1 < n;
        // zero-flux diffusion stencil at the truncation ends
        let mut d = 1.0 + dt * 0.5 * z;
        let mut lap_old = 0.0;
        if interior_r {
            d += dt * 0.5 * cd;
            lap_old += old[j + 1] - old[j];
            upper[j] -= dt * 0.5 * cd;
        }
        if interior_l {
            d += dt * 0.5 * cd;
            lap_old += old[j - 1] - old[j];
            lower[j] -= dt * 0.5 * cd;
        }
        diag[j] = d;
        rhs[j] = old[j] + dt * 0.5 * cd * lap_old - dt * 0.5 * z * old[j];
    }

    // implicit donor-cell fluxes at the interfaces j+1/2
    for j in 0..n - 1 {
        let mu = (op.drift)(t1, 0.5 * (a[j] + a[j + 1]));
        if mu >= 0.0 {
            diag[j] += dt * mu / da; // +F/da in the left cell
            lower[j + 1] -= dt * mu / da; // -F/da in the right cell
        } else {
            upper[j] += dt * mu / da;
            diag[j + 1] -= dt * mu / da;
        }
    }

    let mut scratch = vec![0.0; n];
    tridiag::solve_in_place(&lower, &diag, &upper, &mut rhs, &mut scratch);

    let max = rhs.iter().fold(0.0_f64, |m, v| m.max(*v));
    let min = rhs.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    if min < -1e-12 * max.max(f64::MIN_POSITIVE) {
        return Err(PdeError::NegativeDensity { t: t1, min, floor: -1e-12 * max });
    }
    *surface.level_mut(level + 1) = rhs;
    Ok(())
}

/// Marches from `start_level` to the end of the grid.
pub fn solve_forward(
    surface: &mut Surface,
    start_level: usize,
    op: &ForwardOperator,
) -> Result<(), PdeError> {
    for level in start_level..surface.grid().n_t() - 1 {
        step_forward_conservative(surface, level, op)?;
    }
    Ok(())
}

/// Discrete mass `da * sum(g)` of one level; the quantity the conservative
/// stencil preserves exactly when nothing is killed.
pub fn level_mass(surface: &Surface, level: usize) -> f64 {
    surface.level(level).iter().sum::<f64>() * surface.grid().da()
}
