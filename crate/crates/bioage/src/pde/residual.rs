//! Centered-difference residual of a solved surface plugged back into its
//! continuous equation; the consistency gauge the acceptance tests use.

use super::Surface;

/// The equation a surface claims to solve.
pub enum EquationSpec<'a> {
    Backward {
        drift: &'a dyn Fn(f64, f64) -> f64,
        diffusion: f64,
        zeroth: &'a dyn Fn(f64) -> f64,
        source: &'a dyn Fn(f64, f64, f64) -> f64,
    },
    ForwardConservative {
        drift: &'a dyn Fn(f64, f64) -> f64,
        diffusion: f64,
        kill: &'a dyn Fn(f64) -> f64,
    },
}

/// Max-norm residual over interior nodes. The refined stretch before the
/// horizon (where the drift is singular by construction) and a two-year
/// margin of age against each Dirichlet edge are excluded; what remains
/// gauges consistency where the fields are queried.
pub fn residual(surface: &Surface, eq: &EquationSpec) -> f64 {
    let grid = surface.grid();
    let t = grid.t_nodes();
    let a = grid.a_nodes();
    let da = grid.da();
    let margin = ((2.0 / da).ceil() as usize).max(1);
    let mut worst = 0.0_f64;
    for n in 1..grid.n_t() - 1 {
        if t[n + 1] > grid.uniform_end() + 1e-9 {
            break;
        }
        let h1 = t[n] - t[n - 1];
        let h2 = t[n + 1] - t[n];
        let below = surface.level(n - 1);
        let here = surface.level(n);
        let above = surface.level(n + 1);
        for j in margin..grid.n_a() - margin {
            // nonuniform three-point time derivative
            let ut = (h1 * h1 * above[j] + (h2 * h2 - h1 * h1) * here[j] - h2 * h2 * below[j])
                / (h1 * h2 * (h1 + h2));
            let uaa = (here[j + 1] - 2.0 * here[j] + here[j - 1]) / (da * da);
            let r = match eq {
                EquationSpec::Backward { drift, diffusion, zeroth, source } => {
                    let ua = (here[j + 1] - here[j - 1]) / (2.0 * da);
                    ut + drift(t[n], a[j]) * ua + diffusion * uaa - zeroth(a[j]) * here[j]
                        + source(t[n], a[j], here[j])
                }
                EquationSpec::ForwardConservative { drift, diffusion, kill } => {
                    let flux_a = (drift(t[n], a[j + 1]) * here[j + 1]
                        - drift(t[n], a[j - 1]) * here[j - 1])
                        / (2.0 * da);
                    ut + flux_a - diffusion * uaa + kill(a[j]) * here[j]
                }
            };
            worst = worst.max(r.abs());
        }
    }
    worst
}
