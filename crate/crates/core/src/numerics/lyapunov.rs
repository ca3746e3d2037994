use super::{spectral_bound_radius, DenseMatrix, NumericsError};

const MAX_DOUBLINGS: usize = 64;

/// Solves the discrete Lyapunov equation `R = Q + A·R·Aᵀ` for `r(A) < 1`.
///
/// Uses the doubling form of the fixed-point iteration `R ← Q + A·R·Aᵀ`:
/// after `k` steps the iterate equals the partial sum `Σ_{j<2^k} Aʲ Q (Aᵀ)ʲ`.
/// Iteration stops once the update is below `1e-14·‖R‖`.
pub fn solve_discrete_lyapunov(a: &DenseMatrix, q: &DenseMatrix) -> Result<DenseMatrix, NumericsError> {
    a.ensure_square()?;
    q.ensure_symmetric()?;
    if a.dims() != q.dims() {
        return Err(NumericsError::DimensionMismatch { expected: a.dims(), found: q.dims() });
    }
    let (_, radius) = spectral_bound_radius(a)?;
    if radius >= 1.0 {
        return Err(NumericsError::UnstableMatrix { radius });
    }

    let mut r = q.symmetrized();
    let mut power = a.clone();
    for _ in 0..MAX_DOUBLINGS {
        let update = (&(&power * &r) * &power.transpose()).symmetrized();
        r = &r + &update;
        if update.max_abs() <= 1e-14 * r.max_abs() {
            return Ok(r);
        }
        power = &power * &power;
    }
    Err(NumericsError::NoConvergence {
        what: "discrete Lyapunov doubling",
        iterations: MAX_DOUBLINGS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_dynamics_returns_forcing() {
        let q = DenseMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]);
        let r = solve_discrete_lyapunov(&DenseMatrix::zeros(2, 2), &q).unwrap();
        assert_eq!(r, q);
    }

    #[test]
    fn scalar_geometric_series() {
        let a = DenseMatrix::from_rows(&[vec![0.5]]);
        let q = DenseMatrix::from_rows(&[vec![1.0]]);
        let r = solve_discrete_lyapunov(&a, &q).unwrap();
        // Σ 0.25^k = 4/3
        assert!((r[(0, 0)] - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unstable_rejected() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.1], vec![-1.1, 0.0]]);
        let err = solve_discrete_lyapunov(&a, &DenseMatrix::identity(2)).unwrap_err();
        assert!(matches!(err, NumericsError::UnstableMatrix { .. }));
    }

    #[test]
    fn residual_small_for_rotation_contraction() {
        let a = DenseMatrix::from_rows(&[vec![0.9, 0.3], vec![-0.3, 0.9]]);
        let q = DenseMatrix::identity(2);
        let r = solve_discrete_lyapunov(&a, &q).unwrap();
        let resid = &(&r - &q) - &(&(&a * &r) * &a.transpose());
        assert!(resid.max_abs() <= 1e-12 * r.max_abs());
    }
}
