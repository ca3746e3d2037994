use std::time::Instant;

use super::{GaussianError, GaussianTarget, ProposalModel};
use crate::diagnostics::{ChainTrace, TraceMeta};
use crate::rng::SeededRng;

/// A Markov kernel on `ℝⁿ` that can drive [`run_chain`].
#[derive(Debug, Clone, Copy)]
pub enum Kernel<'a> {
    /// Non-reversible MH: the model's proposal with the vorticity-augmented ratio.
    Nrmh(&'a ProposalModel),
    /// Classical MH with the model's (skew-drift) proposal.
    ProposalMh(&'a ProposalModel),
    /// Reversible Langevin proposal `N((I − hV⁻¹)x, 2hI)` with MH acceptance.
    Mala { target: &'a GaussianTarget, h: f64 },
}

impl Kernel<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Nrmh(_) => "NRMH",
            Kernel::ProposalMh(_) => "MH-skew-proposal",
            Kernel::Mala { .. } => "MH-langevin",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Kernel::Nrmh(m) | Kernel::ProposalMh(m) => m.dim(),
            Kernel::Mala { target, .. } => target.dim(),
        }
    }

    /// `(h, σ, c)` as recorded in trace metadata.
    pub fn params(&self) -> (f64, f64, f64) {
        match self {
            Kernel::Nrmh(m) => (m.params().h, m.params().sigma, m.params().c),
            Kernel::ProposalMh(m) => (m.params().h, m.params().sigma, 0.0),
            Kernel::Mala { h, .. } => (*h, 1.0, 0.0),
        }
    }

    pub fn step(&self, x: &[f64], rng: &mut SeededRng) -> Result<(Vec<f64>, bool), GaussianError> {
        match self {
            Kernel::Nrmh(m) => nrmh_step(m, x, rng),
            Kernel::ProposalMh(m) => proposal_mh_step(m, x, rng),
            Kernel::Mala { target, h } => Ok(mala_baseline_step(target, *h, x, rng)),
        }
    }
}

/// Draws the `n` normals of the proposal, then one uniform for the accept test.
fn draw(n: usize, rng: &mut SeededRng) -> (Vec<f64>, f64) {
    let mut z = vec![0.0; n];
    rng.fill_normal(&mut z);
    (z, rng.uniform())
}

fn accept(x: &[f64], y: Vec<f64>, u: f64, ratio: f64) -> (Vec<f64>, bool) {
    if u < ratio.min(1.0) {
        (y, true)
    } else {
        (x.to_vec(), false)
    }
}

/// One NRMH transition: propose from `N((I + hB)x, 2hσ²I)`, accept with probability `1 ∧ R(x, y)`.
pub fn nrmh_step(model: &ProposalModel, x: &[f64], rng: &mut SeededRng) -> Result<(Vec<f64>, bool), GaussianError> {
    let (z, u) = draw(x.len(), rng);
    let y = model.propose_with(x, &z);
    let r = model.hastings_ratio(x, &y)?;
    Ok(accept(x, y, u, r))
}

/// Classical MH with the same proposal and random-number usage as [`nrmh_step`].
pub fn proposal_mh_step(
    model: &ProposalModel,
    x: &[f64],
    rng: &mut SeededRng,
) -> Result<(Vec<f64>, bool), GaussianError> {
    let (z, u) = draw(x.len(), rng);
    let y = model.propose_with(x, &z);
    let r = model.mh_ratio(x, &y);
    if r.is_nan() {
        return Err(GaussianError::NonFinite);
    }
    Ok(accept(x, y, u, r))
}

/// One MALA step for a Gaussian target.
pub fn mala_baseline_step(target: &GaussianTarget, h: f64, x: &[f64], rng: &mut SeededRng) -> (Vec<f64>, bool) {
    let (z, u) = draw(x.len(), rng);
    let prec = target.precision();
    let mean = |p: &[f64]| -> Vec<f64> {
        let g = prec.matvec(p);
        p.iter().zip(&g).map(|(pi, gi)| pi - h * gi).collect()
    };
    let scale = (2.0 * h).sqrt();
    let y: Vec<f64> = mean(x).iter().zip(&z).map(|(m, zi)| m + scale * zi).collect();
    let log_q = |from: &[f64], to: &[f64]| -> f64 {
        let m = mean(from);
        -to.iter().zip(&m).map(|(t, mi)| (t - mi) * (t - mi)).sum::<f64>() / (4.0 * h)
    };
    let log_r = target.log_density(&y) + log_q(&y, x) - target.log_density(x) - log_q(x, &y);
    accept(x, y, u, log_r.exp())
}

/// Runs `steps` transitions from `x0`; the trace holds the states after each step.
pub fn run_chain(kernel: Kernel<'_>, x0: &[f64], steps: usize, seed: u64) -> Result<ChainTrace, GaussianError> {
    if x0.len() != kernel.dim() {
        return Err(GaussianError::Dimension { expected: kernel.dim(), found: x0.len() });
    }
    let start = Instant::now();
    let (h, sigma, c) = kernel.params();
    let meta = TraceMeta::new(seed, kernel.name(), h, sigma, c);
    let mut trace = ChainTrace::with_capacity(x0.len(), steps, meta);
    let mut rng = SeededRng::new(seed);
    let mut x = x0.to_vec();
    for _ in 0..steps {
        let (next, accepted) = kernel.step(&x, &mut rng)?;
        trace.push(&next, accepted);
        x = next;
    }
    trace.meta_mut().wall_time_secs = start.elapsed().as_secs_f64();
    Ok(trace)
}
