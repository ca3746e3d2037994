//! Non-reversible Metropolis-Hastings on Gaussian targets.
//!
//! The proposal is the Euler step of a linear diffusion with skew drift,
//! `Y ~ N((I + hB)x, 2hσ²I)` with `B = −(I + S)V⁻¹`. Its stationary joint law
//! `f(x, y)` is Gaussian, and `γ(x, y) = f(x, y) − f(y, x)` serves as the
//! vorticity density added to the Hastings ratio.

mod drift_opt;
mod params;
pub mod presets;
mod proposal;
mod sampler;
mod target;

use thiserror::Error;

use crate::numerics::NumericsError;

pub use drift_opt::{optimize_skew_drift, DriftBudget, DriftOptimum};
pub use params::{compute_constants, max_sigma_squared, params_from_constants, select_params, NrmhParams};
pub use proposal::{general_target_ratio, GeneralTarget, ProposalModel, VorticityParts};
pub use sampler::{mala_baseline_step, run_chain, Kernel};
pub use target::{GaussianTarget, SkewDrift};

/// Magnitude below which a negative ratio is treated as rounding noise.
pub const NEGATIVE_RATIO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaussianError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("drift matrix is not skew-symmetric (max |S + Sᵀ| = {asymmetry:e})")]
    NotSkew { asymmetry: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("step size {h} is unstable (bound {bound}, spectral radius of I + hB {radius})")]
    UnstableStepSize { h: f64, bound: f64, radius: f64 },
    #[error("invariant {what} violated (error {error:e})")]
    InvariantViolation { what: &'static str, error: f64 },
    #[error("non-finite value while evaluating the Hastings ratio")]
    NonFinite,
    #[error("envelope condition violated: negative numerator {numerator:e}")]
    EnvelopeViolationDetected { numerator: f64 },
}
