//! Thomas algorithm for the tridiagonal systems every implicit step produces.

/// Solves `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]` in
/// place, overwriting `rhs` with the solution. `scratch` must match the
/// system size. The systems here are strictly diagonally dominant, so no
/// pivoting is needed.
pub fn solve_in_place(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    scratch: &mut [f64],
) {
    let n = diag.len();
    debug_assert!(n >= 2 && lower.len() == n && upper.len() == n && rhs.len() == n);
    scratch[0] = upper[0] / diag[0];
    rhs[0] /= diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i] * scratch[i - 1];
        scratch[i] = upper[i] / denom;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn multiply(lower: &[f64], diag: &[f64], upper: &[f64], x: &[f64]) -> Vec<f64> {
        let n = diag.len();
        (0..n)
            .map(|i| {
                let mut v = diag[i] * x[i];
                if i > 0 {
                    v += lower[i] * x[i - 1];
                }
                if i < n - 1 {
                    v += upper[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    #[test]
    fn solves_small_system() {
        let lower = vec![0.0, -1.0, -1.0];
        let diag = vec![4.0, 4.0, 4.0];
        let upper = vec![-1.0, -1.0, 0.0];
        let mut rhs = vec![3.0, 2.0, 3.0];
        let mut scratch = vec![0.0; 3];
        solve_in_place(&lower, &diag, &upper, &mut rhs, &mut scratch);
        assert!((rhs[0] - 1.0).abs() < 1e-14);
        assert!((rhs[1] - 1.0).abs() < 1e-14);
        assert!((rhs[2] - 1.0).abs() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn multiplying_back_recovers_rhs(
            n in 2usize..64,
            seed in any::<u64>(),
        ) {
            // diagonally dominant random system; residual must be machine level
            let mut state = seed | 1;
            let mut next = move || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            };
            let lower: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { next() }).collect();
            let upper: Vec<f64> = (0..n).map(|i| if i == n - 1 { 0.0 } else { next() }).collect();
            let diag: Vec<f64> =
                (0..n).map(|i| 2.0 + lower[i].abs() + upper[i].abs() + next().abs()).collect();
            let rhs: Vec<f64> = (0..n).map(|_| next()).collect();
            let mut x = rhs.clone();
            let mut scratch = vec![0.0; n];
            solve_in_place(&lower, &diag, &upper, &mut x, &mut scratch);
            let back = multiply(&lower, &diag, &upper, &x);
            for (b, r) in back.iter().zip(&rhs) {
                prop_assert!((b - r).abs() <= 1e-12, "residual {}", (b - r).abs());
            }
        }
    }
}
