use super::{GaussianError, GaussianTarget, SkewDrift};
use crate::numerics::{spectral_norm, DenseMatrix};

/// Relative slack allowed when checking the parameter conditions, so that the
/// boundary values produced by [`select_params`] validate.
const BOUNDARY_SLACK: f64 = 1e-12;

/// Step size `h`, diffusivity scale `σ`, vorticity scale `c` and the constants
/// `C1 ≤ C2` they were validated against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NrmhParams {
    pub h: f64,
    pub sigma: f64,
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
}

/// Largest admissible `σ²` for step size `h`: `(2 − hC2)/(2 − h(C2 − C1))`.
pub fn max_sigma_squared(h: f64, c1: f64, c2: f64) -> f64 {
    (2.0 - h * c2) / (2.0 - h * (c2 - c1))
}

impl NrmhParams {
    /// Validates `h < 2/C2`, `σ² ≤ (2 − hC2)/(2 − h(C2 − C1))` and `0 ≤ c ≤ σⁿ`.
    ///
    /// `c = 0` is accepted: it turns the sampler into plain Metropolis-Hastings
    /// with the same proposal, and then the bound on `σ` is not needed.
    pub fn new(n: usize, h: f64, sigma: f64, c: f64, c1: f64, c2: f64) -> Result<Self, GaussianError> {
        let bad = |msg: String| Err(GaussianError::InvalidParams(msg));
        if ![h, sigma, c, c1, c2].iter().all(|v| v.is_finite()) {
            return bad("non-finite parameter".into());
        }
        if !(0.0 < c1 && c1 <= c2 * (1.0 + BOUNDARY_SLACK)) {
            return bad(format!("constants must satisfy 0 < C1 <= C2, got C1 = {c1}, C2 = {c2}"));
        }
        if h <= 0.0 || sigma <= 0.0 || c < 0.0 {
            return bad(format!("need h > 0, sigma > 0, c >= 0 (h = {h}, sigma = {sigma}, c = {c})"));
        }
        if h * c2 >= 2.0 {
            return bad(format!("h = {h} is not below 2/C2 = {}", 2.0 / c2));
        }
        let s2max = max_sigma_squared(h, c1, c2);
        if c > 0.0 && sigma * sigma > s2max * (1.0 + BOUNDARY_SLACK) {
            return bad(format!("sigma^2 = {} exceeds {s2max} for h = {h}", sigma * sigma));
        }
        let cmax = sigma.powi(n as i32);
        if c > cmax * (1.0 + BOUNDARY_SLACK) {
            return bad(format!("c = {c} exceeds sigma^n = {cmax}"));
        }
        Ok(Self { h, sigma, c, c1, c2 })
    }

    /// Same `h` and `σ` with a different vorticity scale.
    pub fn with_c(&self, n: usize, c: f64) -> Result<Self, GaussianError> {
        Self::new(n, self.h, self.sigma, c, self.c1, self.c2)
    }
}

/// `C1 = ‖V^{−1/2}(I+S)V⁻¹(I−S)V^{1/2}‖` and `C2 = ‖V^{−1/2}(I+S)V^{−1/2}‖²·‖V‖`.
pub fn compute_constants(target: &GaussianTarget, drift: &SkewDrift) -> Result<(f64, f64), GaussianError> {
    let n = target.dim();
    if drift.dim() != n {
        return Err(GaussianError::Dimension { expected: n, found: drift.dim() });
    }
    let half = target.covariance_power(0.5)?;
    let neg_half = target.covariance_power(-0.5)?;
    let id = DenseMatrix::identity(n);
    let s = drift.s();
    let ips = &id + &s;
    let ims = &id - &s;
    let c1 = spectral_norm(&(&(&(&(&neg_half * &ips) * target.precision()) * &ims) * &half))?;
    let inner = spectral_norm(&(&(&neg_half * &ips) * &neg_half))?;
    let c2 = inner * inner * spectral_norm(target.covariance())?;
    Ok((c1, c2))
}

/// Parameters maximizing the admissible vorticity `h·σⁿ(h)`, with `σ` at its
/// largest admissible value and `c = σⁿ`.
pub fn select_params(target: &GaussianTarget, drift: &SkewDrift) -> Result<NrmhParams, GaussianError> {
    let (c1, c2) = compute_constants(target, drift)?;
    params_from_constants(target.dim(), c1, c2)
}

/// The selection rule of [`select_params`] given the constants directly.
pub fn params_from_constants(n: usize, c1: f64, c2: f64) -> Result<NrmhParams, GaussianError> {
    let nf = n as f64;
    // Rationalized form of
    //   2/C2 + ((n+2)C1 − √((n−2)²C1² + 8nC1C2)) / (2C2(C2 − C1)),
    // which stays accurate as C1 → C2 and reduces to 4/((n+2)C2) there.
    let a = (nf + 2.0) * c1;
    let b = ((nf - 2.0).powi(2) * c1 * c1 + 8.0 * nf * c1 * c2).sqrt();
    let h = 2.0 / c2 - 4.0 * nf * c1 / (c2 * (a + b));
    let sigma = max_sigma_squared(h, c1, c2).sqrt();
    let c = sigma.powi(n as i32);
    NrmhParams::new(n, h, sigma, c, c1, c2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textbook_h(n: f64, c1: f64, c2: f64) -> f64 {
        2.0 / c2 + (n + 2.0) * c1 / (2.0 * c2 * (c2 - c1))
            - ((n - 2.0).powi(2) * c1 * c1 + 8.0 * n * c1 * c2).sqrt() / (2.0 * c2 * (c2 - c1))
    }

    #[test]
    fn identity_constants() {
        let t = GaussianTarget::from_diag(&[1.0, 1.0]).unwrap();
        let (c1, c2) = compute_constants(&t, &SkewDrift::zero(&t)).unwrap();
        assert!((c1 - 1.0).abs() < 1e-12 && (c2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_constants_without_skew() {
        let t = GaussianTarget::from_diag(&[1.0, 1.0, 0.25]).unwrap();
        let (c1, c2) = compute_constants(&t, &SkewDrift::zero(&t)).unwrap();
        assert!((c1 - 4.0).abs() < 1e-12);
        assert!((c2 - 16.0).abs() < 1e-11);
    }

    #[test]
    fn scalar_selection() {
        let t = GaussianTarget::from_diag(&[1.0]).unwrap();
        let p = select_params(&t, &SkewDrift::zero(&t)).unwrap();
        assert!((p.h - 4.0 / 3.0).abs() < 1e-14);
        assert!((p.sigma * p.sigma - 1.0 / 3.0).abs() < 1e-14);
        assert!((p.c - 1.0 / 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rationalized_step_matches_textbook_form() {
        for &(n, c1, c2) in &[(3, 16.0257, 29.152), (9, 111.8, 185.3), (2, 1.0, 50.0)] {
            let p = params_from_constants(n, c1, c2).unwrap();
            let h = textbook_h(n as f64, c1, c2);
            assert!((p.h - h).abs() < 1e-12 * h);
            assert!(p.h * c2 < 2.0);
        }
        let p = params_from_constants(5, 3.0, 3.0).unwrap();
        assert!((p.h - 4.0 / (7.0 * 3.0)).abs() < 1e-15);
    }

    #[test]
    fn sigma_and_c_grow_as_ratio_shrinks() {
        let c2 = 10.0;
        let mut last = (0.0, 0.0);
        for k in (1..=20).rev() {
            let c1 = c2 * k as f64 / 20.0;
            let p = params_from_constants(4, c1, c2).unwrap();
            assert!(p.sigma > last.0 && p.c > last.1, "not monotone at C1/C2 = {}", c1 / c2);
            last = (p.sigma, p.c);
        }
        assert!(last.0 < 1.0);
    }

    #[test]
    fn conditions_enforced() {
        assert!(NrmhParams::new(1, 2.0, 0.5, 0.1, 1.0, 1.0).is_err());
        assert!(NrmhParams::new(1, 0.5, 0.9, 0.1, 1.0, 1.0).is_err());
        assert!(NrmhParams::new(1, 0.5, 1.0, 0.0, 1.0, 1.0).is_ok());
        assert!(NrmhParams::new(2, 0.5, 0.5, 0.3, 1.0, 1.0).is_err());
        assert!(NrmhParams::new(2, 0.5, 0.5, 0.0, 1.0, 1.0).is_ok());
        assert!(NrmhParams::new(2, 0.5, 0.5, 0.25, 1.0, 1.0).is_ok());
        assert!(NrmhParams::new(2, 0.5, 0.5, 0.1, 2.0, 1.0).is_err());
    }
}
