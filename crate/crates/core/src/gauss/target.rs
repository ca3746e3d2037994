use std::f64::consts::PI;

use super::GaussianError;
use crate::numerics::{spectral_bound_radius, sym_matrix_function, Cholesky, DenseMatrix};
use crate::rng::SeededRng;

/// Centered Gaussian `N(0, V)` with cached inverse, Cholesky factor and log-determinant.
#[derive(Debug, Clone)]
pub struct GaussianTarget {
    v: DenseMatrix,
    vinv: DenseMatrix,
    chol: Cholesky,
    logdet: f64,
}

impl GaussianTarget {
    pub fn new(v: DenseMatrix) -> Result<Self, GaussianError> {
        let chol = Cholesky::new(&v)?;
        let vinv = chol.inverse();
        let logdet = chol.log_det();
        let v = v.symmetrized();
        let residual = (&v * &vinv).max_abs_diff(&DenseMatrix::identity(v.rows()));
        if residual > 1e-10 * (1.0 + v.max_abs() * vinv.max_abs()) {
            return Err(GaussianError::InvariantViolation { what: "V·V⁻¹ = I", error: residual });
        }
        Ok(Self { v, vinv, chol, logdet })
    }

    pub fn from_diag(d: &[f64]) -> Result<Self, GaussianError> {
        Self::new(DenseMatrix::from_diag(d))
    }

    pub fn dim(&self) -> usize {
        self.v.rows()
    }

    pub fn covariance(&self) -> &DenseMatrix {
        &self.v
    }

    pub fn precision(&self) -> &DenseMatrix {
        &self.vinv
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }

    pub fn log_det(&self) -> f64 {
        self.logdet
    }

    /// `V^{p}` for real `p`, via the symmetric eigendecomposition.
    pub fn covariance_power(&self, p: f64) -> Result<DenseMatrix, GaussianError> {
        Ok(sym_matrix_function(&self.v, |l| l.powf(p))?)
    }

    /// Normalized log-density.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        let n = self.dim() as f64;
        -0.5 * (n * (2.0 * PI).ln() + self.logdet) - 0.5 * self.chol.inv_quad_form(x)
    }

    /// Exact draw `L·z` with `z` standard normal.
    pub fn sample(&self, rng: &mut SeededRng) -> Vec<f64> {
        let n = self.dim();
        let mut z = vec![0.0; n];
        rng.fill_normal(&mut z);
        let l = self.chol.factor();
        (0..n).map(|i| (0..=i).map(|j| l[(i, j)] * z[j]).sum()).collect()
    }
}

/// Skew-symmetric `S` (strict upper triangle stored row by row) and the drift
/// `B = −(I + S)V⁻¹` it induces for a given target.
#[derive(Debug, Clone)]
pub struct SkewDrift {
    n: usize,
    upper: Vec<f64>,
    b: DenseMatrix,
}

impl SkewDrift {
    pub fn zero(target: &GaussianTarget) -> Self {
        let n = target.dim();
        Self::from_upper(target, &vec![0.0; n * (n - 1) / 2]).expect("sized correctly")
    }

    pub fn from_upper(target: &GaussianTarget, upper: &[f64]) -> Result<Self, GaussianError> {
        let n = target.dim();
        if upper.len() != n * (n - 1) / 2 {
            return Err(GaussianError::Dimension { expected: n * (n - 1) / 2, found: upper.len() });
        }
        if upper.iter().any(|v| !v.is_finite()) {
            return Err(crate::numerics::NumericsError::NonFinite.into());
        }
        let mut drift = Self { n, upper: upper.to_vec(), b: DenseMatrix::zeros(n, n) };
        let i_plus_s = &DenseMatrix::identity(n) + &drift.s();
        drift.b = -&(&i_plus_s * target.precision());
        Ok(drift)
    }

    /// Accepts a full matrix that is skew-symmetric within `1e-12·(1 + ‖S‖)`.
    pub fn new(target: &GaussianTarget, s: &DenseMatrix) -> Result<Self, GaussianError> {
        let n = target.dim();
        if s.dims() != (n, n) {
            return Err(GaussianError::Dimension { expected: n, found: s.rows() });
        }
        let mut asym: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                asym = asym.max((s[(i, j)] + s[(j, i)]).abs());
            }
        }
        if asym > 1e-12 * (1.0 + s.max_abs()) {
            return Err(GaussianError::NotSkew { asymmetry: asym });
        }
        let upper: Vec<f64> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| 0.5 * (s[(i, j)] - s[(j, i)]))
            .collect();
        Self::from_upper(target, &upper)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn s(&self) -> DenseMatrix {
        let n = self.n;
        let mut s = DenseMatrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                s[(i, j)] = self.upper[k];
                s[(j, i)] = -self.upper[k];
                k += 1;
            }
        }
        s
    }

    pub fn b(&self) -> &DenseMatrix {
        &self.b
    }

    /// Largest real part of the spectrum of `B`.
    pub fn spectral_bound(&self) -> Result<f64, GaussianError> {
        Ok(spectral_bound_radius(&self.b)?.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_density_matches_scalar_formula() {
        let t = GaussianTarget::from_diag(&[4.0]).unwrap();
        let x = 1.5;
        let expected = -0.5 * (2.0 * PI * 4.0).ln() - 0.5 * x * x / 4.0;
        assert!((t.log_density(&[x]) - expected).abs() < 1e-14);
    }

    #[test]
    fn rejects_indefinite_covariance() {
        let v = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(GaussianTarget::new(v).is_err());
    }

    #[test]
    fn skew_round_trip_and_drift() {
        let t = GaussianTarget::from_diag(&[1.0, 2.0, 4.0]).unwrap();
        let d = SkewDrift::from_upper(&t, &[1.0, -2.0, 0.5]).unwrap();
        let s = d.s();
        assert_eq!(s[(0, 2)], -2.0);
        assert_eq!(s[(2, 0)], 2.0);
        let again = SkewDrift::new(&t, &s).unwrap();
        assert_eq!(again.upper(), d.upper());
        assert!((d.b()[(1, 1)] + 0.5).abs() < 1e-15);
        assert!((d.b()[(0, 1)] + 0.5).abs() < 1e-15);
        assert!(SkewDrift::new(&t, &DenseMatrix::identity(3)).is_err());
    }

    #[test]
    fn zero_drift_is_reversible_bound() {
        let t = GaussianTarget::from_diag(&[1.0, 0.5]).unwrap();
        let s = SkewDrift::zero(&t).spectral_bound().unwrap();
        assert!((s + 1.0).abs() < 1e-12);
    }
}
