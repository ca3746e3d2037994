//! Stationary covariance of the linear recursion `X ← AX + ξ` via the discrete
//! Lyapunov equation, checked against the spectrum of `A`.

use nrmh::numerics::{eigenvalues, solve_discrete_lyapunov, spectral_bound_radius, sym_eigen, DenseMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = DenseMatrix::from_rows(&[vec![0.9, 0.3, 0.0], vec![-0.3, 0.9, 0.1], vec![0.0, -0.1, 0.5]]);
    let (bound, radius) = spectral_bound_radius(&a)?;
    println!("eigenvalues of A   {:?}", eigenvalues(&a)?);
    println!("s(A) = {bound:.4}, r(A) = {radius:.4}");

    let q = DenseMatrix::identity(3).scale(0.1);
    let r = solve_discrete_lyapunov(&a, &q)?;
    let residual = (&(&q + &(&(&a * &r) * &a.transpose())) - &r).max_abs();
    println!("residual |Q + ARA' - R| = {residual:.2e}");
    println!("eigenvalues of R   {:?}", sym_eigen(&r.symmetrized())?.values);
    Ok(())
}
