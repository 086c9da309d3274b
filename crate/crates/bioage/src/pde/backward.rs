//! Implicit backward time stepping for equations of the form
//!
//! ```text
//! u_t + drift(t,a) u_a + diffusion u_aa - zeroth(a) u + source(t,a,u) = 0
//! ```
//!
//! marched from a terminal level down to t = 0. The advection term is
//! first-order upwind and fully implicit (it is singular at the horizon),
//! diffusion and the zeroth-order term carry Crank-Nicolson weights, and the
//! source is averaged across the two levels with Picard lagging when it
//! depends on the unknown.

use super::{tridiag, PdeError, Surface};

pub const PICARD_TOL: f64 = 1e-10;
pub const PICARD_MAX: usize = 50;

/// Coefficients and Dirichlet data for one backward equation.
pub struct BackwardOperator<'a> {
    pub drift: &'a dyn Fn(f64, f64) -> f64,
    /// Diffusion coefficient sigma^2 / 2.
    pub diffusion: f64,
    pub zeroth: &'a dyn Fn(f64) -> f64,
    pub left: &'a dyn Fn(f64) -> f64,
    pub right: &'a dyn Fn(f64) -> f64,
}

/// Source term; `Linear` sources skip the Picard loop.
pub enum Source<'a> {
    Linear(&'a dyn Fn(f64, f64) -> f64),
    Nonlinear(&'a dyn Fn(f64, f64, f64) -> f64),
}

impl Source<'_> {
    fn eval(&self, t: f64, a: f64, u: f64) -> f64 {
        match self {
            Source::Linear(f) => f(t, a),
            Source::Nonlinear(f) => f(t, a, u),
        }
    }
}

/// Fills `level` from the already-populated `level + 1`.
pub fn step_backward(
    surface: &mut Surface,
    level: usize,
    op: &BackwardOperator,
    source: &Source,
) -> Result<(), PdeError> {
    let grid = surface.grid().clone();
    let n = grid.n_a();
    let da = grid.da();
    let t0 = grid.t_nodes()[level];
    let t1 = grid.t_nodes()[level + 1];
    let dt = t1 - t0;
    let cd = op.diffusion / (da * da);

    let upper_row = surface.level(level + 1).to_vec();

    let mut lower = vec![0.0; n];
    let mut diag = vec![1.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs_base = vec![0.0; n];
    let a = grid.a_nodes();

    for j in 1..n - 1 {
        let mu = (op.drift)(t0, a[j]);
        let z = (op.zeroth)(a[j]);
        let mut d = 1.0 + 2.0 * dt * 0.5 * cd + dt * 0.5 * z;
        let mut lo = -dt * 0.5 * cd;
        let mut up = -dt * 0.5 * cd;
        if mu >= 0.0 {
            // information arrives from the right when marching backward
            d += dt * mu / da;
            up -= dt * mu / da;
        } else {
            d -= dt * mu / da;
            lo += dt * mu / da;
        }
        lower[j] = lo;
        diag[j] = d;
        upper[j] = up;
        let lap = upper_row[j + 1] - 2.0 * upper_row[j] + upper_row[j - 1];
        rhs_base[j] = upper_row[j] + dt * 0.5 * cd * lap - dt * 0.5 * z * upper_row[j];
    }

    let lb = (op.left)(t0);
    let rb = (op.right)(t0);

    let mut scratch = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut guess = upper_row.clone();
    let src_upper: Vec<f64> =
        (0..n).map(|j| source.eval(t1, a[j], upper_row[j])).collect();

    let max_iter = match source {
        Source::Linear(_) => 1,
        Source::Nonlinear(_) => PICARD_MAX,
    };
    for iter in 0..max_iter {
        for j in 1..n - 1 {
            rhs[j] = rhs_base[j] + dt * 0.5 * (source.eval(t0, a[j], guess[j]) + src_upper[j]);
        }
        rhs[0] = lb;
        rhs[n - 1] = rb;
        tridiag::solve_in_place(&lower, &diag, &upper, &mut rhs, &mut scratch);
        let scale = rhs.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let delta = rhs
            .iter()
            .zip(&guess)
            .fold(0.0_f64, |m, (new, old)| m.max((new - old).abs()));
        std::mem::swap(&mut guess, &mut rhs);
        if matches!(source, Source::Linear(_)) || delta <= PICARD_TOL * scale {
            *surface.level_mut(level) = guess;
            return Ok(());
        }
        if iter + 1 == max_iter {
            return Err(PdeError::PicardNoConvergence {
                t: t0,
                iterations: max_iter,
                residual: delta / scale,
            });
        }
    }
    unreachable!("picard loop always returns")
}

/// Populates the terminal level and marches the whole surface down to t = 0.
pub fn solve_backward(
    surface: &mut Surface,
    op: &BackwardOperator,
    source: &Source,
    terminal: &dyn Fn(f64) -> f64,
) -> Result<(), PdeError> {
    let grid = surface.grid().clone();
    let last = grid.n_t() - 1;
    let row: Vec<f64> = grid.a_nodes().iter().map(|&a| terminal(a)).collect();
    *surface.level_mut(last) = row;
    for level in (0..last).rev() {
        step_backward(surface, level, op, source)?;
    }
    Ok(())
}
