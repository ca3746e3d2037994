use std::f64::consts::PI;

use super::{params, GaussianError, GaussianTarget, NrmhParams, SkewDrift, NEGATIVE_RATIO_TOL};
use crate::numerics::{
    solve_discrete_lyapunov, spectral_bound_radius, spectral_norm, sym_eigen, Cholesky, DenseMatrix,
};

/// Proposal `N(Ax, 2hσ²I)` with `A = I + hB`, together with the stationary
/// covariance `R` of the proposal chain and the joint covariance `M` of
/// `(X, Y)` under that chain.
#[derive(Debug, Clone)]
pub struct ProposalModel {
    target: GaussianTarget,
    drift: SkewDrift,
    params: NrmhParams,
    a: DenseMatrix,
    r: DenseMatrix,
    r_chol: Cholesky,
    m: DenseMatrix,
    m_inv: DenseMatrix,
    noise_var: f64,
    log_norm_f: f64,
    log_norm_piq: f64,
}

/// The four log-densities entering the Hastings ratio at `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VorticityParts {
    pub logf_xy: f64,
    pub logf_yx: f64,
    pub logpiq_xy: f64,
    pub logpiq_yx: f64,
}

impl VorticityParts {
    /// `γ(x, y) = f(x, y) − f(y, x)` (unscaled).
    pub fn gamma(&self) -> f64 {
        self.logf_xy.exp() - self.logf_yx.exp()
    }
}

impl ProposalModel {
    /// Builds the model and verifies the structural identities of the
    /// construction: `det M = (2hσ²)ⁿ det R`, `σ²V ⪯ R ⪯ σ²κV` with
    /// `κ = (2 − h(C2 − C1))/(2 − hC2)`, and the closed-form `M⁻¹`.
    pub fn new(target: GaussianTarget, drift: SkewDrift, params: NrmhParams) -> Result<Self, GaussianError> {
        let n = target.dim();
        if drift.dim() != n {
            return Err(GaussianError::Dimension { expected: n, found: drift.dim() });
        }
        // Revalidate in case the fields were edited after construction.
        let params = NrmhParams::new(n, params.h, params.sigma, params.c, params.c1, params.c2)?;
        let NrmhParams { h, sigma, c1, c2, .. } = params;
        let id = DenseMatrix::identity(n);

        let neg_half = target.covariance_power(-0.5)?;
        let s = drift.s();
        let stab = spectral_norm(&(&(&neg_half * &(&id - &(&s * &s))) * &neg_half))?;
        let bound = 2.0 / stab;
        let a = &id + &drift.b().scale(h);
        let (_, radius) = spectral_bound_radius(&a)?;
        if h >= bound || radius >= 1.0 {
            return Err(GaussianError::UnstableStepSize { h, bound, radius });
        }

        let noise_var = 2.0 * h * sigma * sigma;
        let r = solve_discrete_lyapunov(&a, &id.scale(noise_var))?.symmetrized();
        let r_chol = Cholesky::new(&r)?;
        let r_inv = r_chol.inverse();
        let at = a.transpose();
        let ra = &r * &at;
        let m = DenseMatrix::block2x2(&r, &ra, &ra.transpose(), &r).symmetrized();
        let m_inv = DenseMatrix::block2x2(
            &(&r_inv + &(&at * &a).scale(1.0 / noise_var)),
            &at.scale(-1.0 / noise_var),
            &a.scale(-1.0 / noise_var),
            &id.scale(1.0 / noise_var),
        );

        let nf = n as f64;
        let log_norm_f = -nf * (2.0 * PI).ln() - 0.5 * (nf * noise_var.ln() + r_chol.log_det());
        let log_norm_piq = -nf * (2.0 * PI).ln() - 0.5 * (target.log_det() + nf * noise_var.ln());

        let model = Self {
            target,
            drift,
            params,
            a,
            r,
            r_chol,
            m,
            m_inv,
            noise_var,
            log_norm_f,
            log_norm_piq,
        };
        model.check_invariants(c1, c2)?;
        Ok(model)
    }

    /// Builds with parameters from [`params::select_params`].
    pub fn with_selected_params(target: GaussianTarget, drift: SkewDrift) -> Result<Self, GaussianError> {
        let p = params::select_params(&target, &drift)?;
        Self::new(target, drift, p)
    }

    fn check_invariants(&self, c1: f64, c2: f64) -> Result<(), GaussianError> {
        let n = self.dim();
        let NrmhParams { h, sigma, .. } = self.params;
        let violation = |what, error| Err(GaussianError::InvariantViolation { what, error });

        let m_chol = Cholesky::new(&self.m)?;
        let log_det_err = m_chol.log_det() - (n as f64 * self.noise_var.ln() + self.r_chol.log_det());
        let det_err = log_det_err.exp_m1().abs();
        if det_err > 1e-8 {
            return violation("det M = (2hσ²)ⁿ det R", det_err);
        }

        let s2 = sigma * sigma;
        let v = self.target.covariance();
        let lower = sym_eigen(&(&self.r - &v.scale(s2)).symmetrized())?.min();
        if lower < -1e-10 {
            return violation("R ⪰ σ²V", -lower);
        }
        let kappa = (2.0 - h * (c2 - c1)) / (2.0 - h * c2);
        let upper = sym_eigen(&(&self.r - &v.scale(s2 * kappa)).symmetrized())?.max();
        if upper > 1e-10 {
            return violation("R ⪯ σ²κV", upper);
        }

        let prod_err = (&self.m * &self.m_inv).max_abs_diff(&DenseMatrix::identity(2 * n));
        if prod_err > 1e-8 {
            return violation("M·M⁻¹ = I", prod_err);
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.target.dim()
    }

    pub fn target(&self) -> &GaussianTarget {
        &self.target
    }

    pub fn drift(&self) -> &SkewDrift {
        &self.drift
    }

    pub fn params(&self) -> &NrmhParams {
        &self.params
    }

    /// `A = I + hB`.
    pub fn transition(&self) -> &DenseMatrix {
        &self.a
    }

    /// Proposal noise variance `2hσ²`.
    pub fn noise_variance(&self) -> f64 {
        self.noise_var
    }

    /// Stationary covariance of the proposal chain: `R = 2hσ²I + ARAᵀ`.
    pub fn r(&self) -> &DenseMatrix {
        &self.r
    }

    /// `M = [[R, RAᵀ], [AR, R]]`.
    pub fn m(&self) -> &DenseMatrix {
        &self.m
    }

    pub fn m_inv(&self) -> &DenseMatrix {
        &self.m_inv
    }

    pub fn log_norm_f(&self) -> f64 {
        self.log_norm_f
    }

    pub fn log_norm_piq(&self) -> f64 {
        self.log_norm_piq
    }

    /// Draws `Y = Ax + √(2hσ²)·z` given standard normals `z`.
    pub fn propose_with(&self, x: &[f64], z: &[f64]) -> Vec<f64> {
        let scale = self.noise_var.sqrt();
        self.a.matvec(x).iter().zip(z).map(|(m, zi)| m + scale * zi).collect()
    }

    fn residual_sq(&self, x: &[f64], y: &[f64]) -> f64 {
        let ax = self.a.matvec(x);
        y.iter().zip(&ax).map(|(yi, m)| (yi - m) * (yi - m)).sum()
    }

    /// Log of the proposal density `q(x, y)`.
    pub fn log_q(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim() as f64;
        -0.5 * n * (2.0 * PI * self.noise_var).ln() - 0.5 * self.residual_sq(x, y) / self.noise_var
    }

    pub fn log_parts(&self, x: &[f64], y: &[f64]) -> VorticityParts {
        let rx = self.r_chol.inv_quad_form(x);
        let ry = self.r_chol.inv_quad_form(y);
        let vx = self.target.cholesky().inv_quad_form(x);
        let vy = self.target.cholesky().inv_quad_form(y);
        let dxy = self.residual_sq(x, y) / self.noise_var;
        let dyx = self.residual_sq(y, x) / self.noise_var;
        VorticityParts {
            logf_xy: self.log_norm_f - 0.5 * (rx + dxy),
            logf_yx: self.log_norm_f - 0.5 * (ry + dyx),
            logpiq_xy: self.log_norm_piq - 0.5 * (vx + dxy),
            logpiq_yx: self.log_norm_piq - 0.5 * (vy + dyx),
        }
    }

    /// Hastings ratio `(c·γ(x,y) + π(y)q(y,x)) / (π(x)q(x,y))`.
    pub fn hastings_ratio(&self, x: &[f64], y: &[f64]) -> Result<f64, GaussianError> {
        assemble_ratio(self.params.c, &self.log_parts(x, y))
    }

    /// Classical Metropolis-Hastings ratio `π(y)q(y,x) / (π(x)q(x,y))` for this proposal.
    pub fn mh_ratio(&self, x: &[f64], y: &[f64]) -> f64 {
        let p = self.log_parts(x, y);
        (p.logpiq_yx - p.logpiq_xy).exp()
    }

    /// `c·γ(y,x) + π(x)q(x,y)`, which must be nonnegative everywhere.
    pub fn nonnegativity_term(&self, x: &[f64], y: &[f64]) -> f64 {
        let p = self.log_parts(x, y);
        self.params.c * (p.logf_yx.exp() - p.logf_xy.exp()) + p.logpiq_xy.exp()
    }
}

/// `c·e^{l1−l0} − c·e^{l2−l0} + e^{l3−l0}` with rounding-level negatives clamped.
fn assemble_ratio(c: f64, p: &VorticityParts) -> Result<f64, GaussianError> {
    let l0 = p.logpiq_xy;
    let r = c * (p.logf_xy - l0).exp() - c * (p.logf_yx - l0).exp() + (p.logpiq_yx - l0).exp();
    if !r.is_finite() {
        return Err(GaussianError::NonFinite);
    }
    if r < 0.0 {
        if r >= -NEGATIVE_RATIO_TOL {
            return Ok(0.0);
        }
        return Err(GaussianError::InvariantViolation { what: "nonnegative Hastings ratio", error: -r });
    }
    Ok(r)
}

type LogDensity = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A target known only through an unnormalized log-density, dominated from
/// below by a Gaussian envelope: `k·π₀ ≤ π`.
pub struct GeneralTarget {
    logpi: LogDensity,
    envelope: GaussianTarget,
    k: f64,
}

impl GeneralTarget {
    pub fn new(
        logpi: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        envelope: GaussianTarget,
        k: f64,
    ) -> Result<Self, GaussianError> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(GaussianError::InvalidParams(format!("envelope constant k = {k} must be positive")));
        }
        Ok(Self { logpi: Box::new(logpi), envelope, k })
    }

    pub fn log_pi(&self, x: &[f64]) -> f64 {
        (self.logpi)(x)
    }

    pub fn envelope(&self) -> &GaussianTarget {
        &self.envelope
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

impl std::fmt::Debug for GeneralTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GeneralTarget").field("envelope", &self.envelope).field("k", &self.k).finish()
    }
}

/// `(k·c·γ(x,y) + π(y)q(y,x)) / (π(x)q(x,y))`, with `γ` and `c` taken from a
/// model built for the envelope.
pub fn general_target_ratio(
    gt: &GeneralTarget,
    model: &ProposalModel,
    x: &[f64],
    y: &[f64],
) -> Result<f64, GaussianError> {
    let env = model.target().covariance();
    if env.dims() != gt.envelope.covariance().dims()
        || env.max_abs_diff(gt.envelope.covariance()) > 1e-12 * (1.0 + env.max_abs())
    {
        return Err(GaussianError::InvalidParams("model was not built for this envelope".into()));
    }
    let parts = model.log_parts(x, y);
    let log_q_xy = parts.logpiq_xy - model.target().log_density(x);
    let log_q_yx = parts.logpiq_yx - model.target().log_density(y);
    let l0 = gt.log_pi(x) + log_q_xy;
    let l3 = gt.log_pi(y) + log_q_yx;
    let kc = gt.k * model.params().c;
    let r = kc * (parts.logf_xy - l0).exp() - kc * (parts.logf_yx - l0).exp() + (l3 - l0).exp();
    if !r.is_finite() {
        return Err(GaussianError::NonFinite);
    }
    if r < -NEGATIVE_RATIO_TOL {
        return Err(GaussianError::EnvelopeViolationDetected { numerator: r * l0.exp() });
    }
    Ok(r.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::presets;
    use crate::rng::SeededRng;

    #[test]
    fn scalar_construction() {
        let t = GaussianTarget::from_diag(&[1.0]).unwrap();
        let d = SkewDrift::zero(&t);
        let p = NrmhParams::new(1, 0.5, 1.0, 0.0, 1.0, 1.0).unwrap();
        let m = ProposalModel::new(t, d, p).unwrap();
        assert!((m.r()[(0, 0)] - 4.0 / 3.0).abs() < 1e-14);
        let expected = DenseMatrix::from_rows(&[vec![4.0 / 3.0, 2.0 / 3.0], vec![2.0 / 3.0, 4.0 / 3.0]]);
        assert!(m.m().max_abs_diff(&expected) < 1e-14);
        let det = m.m()[(0, 0)] * m.m()[(1, 1)] - m.m()[(0, 1)] * m.m()[(1, 0)];
        assert!((det - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn zero_vorticity_on_the_diagonal() {
        let m = ProposalModel::with_selected_params(
            GaussianTarget::new(presets::benchmark_3d_covariance()).unwrap(),
            SkewDrift::new(
                &GaussianTarget::new(presets::benchmark_3d_covariance()).unwrap(),
                &presets::benchmark_3d_skew(),
            )
            .unwrap(),
        )
        .unwrap();
        let x = [0.3, -1.2, 0.4];
        let p = m.log_parts(&x, &x);
        assert_eq!(p.logf_xy, p.logf_yx);
        assert_eq!(m.hastings_ratio(&[0.0; 3], &[0.0; 3]).unwrap(), 1.0);
        let y = [1.0, 0.2, -0.1];
        let a = m.log_parts(&x, &y);
        let b = m.log_parts(&y, &x);
        assert_eq!((a.logf_xy, a.logf_yx, a.logpiq_xy, a.logpiq_yx), (b.logf_yx, b.logf_xy, b.logpiq_yx, b.logpiq_xy));
        assert_eq!(a.gamma(), -b.gamma());
    }

    #[test]
    fn rejects_unstable_step() {
        let t = GaussianTarget::from_diag(&[1.0]).unwrap();
        let d = SkewDrift::zero(&t);
        let p = NrmhParams { h: 2.5, sigma: 0.1, c: 0.0, c1: 1.0, c2: 1.0 };
        assert!(ProposalModel::new(t, d, p).is_err());
    }

    #[test]
    fn zero_scale_gives_mh_ratio() {
        let t = GaussianTarget::from_diag(&[1.0, 0.5]).unwrap();
        let d = SkewDrift::from_upper(&t, &[0.7]).unwrap();
        let p = crate::gauss::select_params(&t, &d).unwrap().with_c(2, 0.0).unwrap();
        let m = ProposalModel::new(t, d, p).unwrap();
        let mut rng = SeededRng::new(3);
        for _ in 0..100 {
            let x = [rng.normal(), rng.normal()];
            let y = [rng.normal(), rng.normal()];
            assert_eq!(m.hastings_ratio(&x, &y).unwrap(), m.mh_ratio(&x, &y));
        }
    }
}
