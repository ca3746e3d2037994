//! Exact comparison tools for finite chains: stationary distributions,
//! asymptotic variances through the fundamental matrix, uniformization to
//! continuous time and the large-deviations rate function of the occupation
//! measure.

use thiserror::Error;

use crate::markov::{
    make_compat_triple, mh_kernel, nrmh_kernel, Distribution, MarkovError, StochasticMatrix,
    VorticityMatrix,
};
use crate::numerics::{spectral_bound_radius, DenseMatrix, Lu, NumericsError};
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("chain is reducible (stationary null space has dimension {nullity})")]
    Reducible { nullity: usize },
    #[error("chain is periodic: r(P − 𝟙π′) = {radius}")]
    Periodic { radius: f64 },
    #[error("invalid generator: {0}")]
    NotGenerator(String),
    #[error("invalid probability vector: {0}")]
    NotProbability(String),
    #[error("rate function optimization failed: {0}")]
    NoConvergence(String),
}

/// Continuous-time generator: nonnegative off-diagonal, zero row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix(DenseMatrix);

impl GeneratorMatrix {
    pub fn new(g: DenseMatrix) -> Result<Self, AnalysisError> {
        if !g.is_square() {
            return Err(AnalysisError::NotGenerator("not square".into()));
        }
        let tol = 1e-12 * (1.0 + g.max_abs());
        for x in 0..g.rows() {
            for y in 0..g.cols() {
                if x != y && g[(x, y)] < 0.0 {
                    return Err(AnalysisError::NotGenerator(format!("negative rate at ({x}, {y})")));
                }
            }
            let s: f64 = g.row(x).iter().sum();
            if s.abs() > tol {
                return Err(AnalysisError::NotGenerator(format!("row {x} sums to {s:e}")));
            }
        }
        Ok(Self(g))
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.0[(x, y)]
    }

    /// Normalized invariant distribution, `πᵀG = 0`.
    pub fn stationary_distribution(&self) -> Result<Distribution, AnalysisError> {
        null_probability_vector(&(-&self.0.transpose()))
    }
}

/// Rate function value together with the optimizing `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEvalResult {
    pub value: f64,
    /// Positive on the support of `μ` with `u(first support state) = 1`; zero off the support.
    pub maximizer: Vec<f64>,
    pub converged: bool,
}

/// Normalized invariant distribution of an irreducible chain.
pub fn stationary_distribution(p: &StochasticMatrix) -> Result<Distribution, AnalysisError> {
    let n = p.n();
    let a = &DenseMatrix::identity(n) - p.matrix();
    null_probability_vector(&a.transpose())
}

/// Solves `A·π = 0`, `Σπ = 1` when `A` has a one-dimensional null space whose
/// rows sum to zero.
fn null_probability_vector(a: &DenseMatrix) -> Result<Distribution, AnalysisError> {
    let n = a.rows();
    let nullity = n - numerical_rank(a);
    if nullity != 1 {
        return Err(AnalysisError::Reducible { nullity });
    }
    let mut sys = a.clone();
    for j in 0..n {
        sys[(n - 1, j)] = 1.0;
    }
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;
    let lu = Lu::new(&sys)?;
    let mut pi = lu.solve(&rhs);
    // one step of iterative refinement
    let r: Vec<f64> = sys.matvec(&pi).iter().zip(&rhs).map(|(a, b)| b - a).collect();
    let d = lu.solve(&r);
    pi.iter_mut().zip(d).for_each(|(p, d)| *p += d);

    if let Some(v) = pi.iter().find(|&&v| v < -1e-12) {
        return Err(AnalysisError::NotProbability(format!("negative stationary weight {v:e}")));
    }
    let floor = f64::MIN_POSITIVE;
    let pi: Vec<f64> = pi.into_iter().map(|v| v.max(floor)).collect();
    let total: f64 = pi.iter().sum();
    Ok(Distribution::new(pi.into_iter().map(|v| v / total).collect())?)
}

fn numerical_rank(a: &DenseMatrix) -> usize {
    let n = a.rows();
    let m = a.cols();
    let mut w = a.clone();
    let tol = 1e-10 * a.max_abs().max(f64::MIN_POSITIVE);
    let mut rank = 0;
    let mut row_used = vec![false; n];
    let mut col_used = vec![false; m];
    loop {
        let mut best = (0, 0, 0.0);
        for i in (0..n).filter(|&i| !row_used[i]) {
            for j in (0..m).filter(|&j| !col_used[j]) {
                if w[(i, j)].abs() > best.2 {
                    best = (i, j, w[(i, j)].abs());
                }
            }
        }
        if best.2 <= tol {
            return rank;
        }
        let (pi, pj, _) = best;
        row_used[pi] = true;
        col_used[pj] = true;
        rank += 1;
        let pivot = w[(pi, pj)];
        for i in (0..n).filter(|&i| !row_used[i]) {
            let f = w[(i, pj)] / pivot;
            if f != 0.0 {
                for j in 0..m {
                    w[(i, j)] -= f * w[(pi, j)];
                }
            }
        }
    }
}

/// Asymptotic variance of `f` along `P` via the fundamental matrix
/// `Z = (I − P + 𝟙π′)⁻¹`: `σ² = ⟨f̄, (2Z − I) f̄⟩_π` with `f̄ = f − π(f)`.
pub fn asymptotic_variance_exact(
    p: &StochasticMatrix,
    pi: &Distribution,
    f: &[f64],
) -> Result<f64, AnalysisError> {
    let n = p.n();
    if pi.len() != n || f.len() != n {
        return Err(MarkovError::Dimension("chain, distribution and function sizes differ".into()).into());
    }
    let residual = pi.invariance_residual(p);
    if residual > 1e-10 {
        return Err(MarkovError::NotInvariant { residual }.into());
    }
    let mu = pi.normalized();
    let projector = DenseMatrix::from_fn(n, n, |_, y| mu[y]);
    let (_, radius) = spectral_bound_radius(&(p.matrix() - &projector))?;
    if radius >= 1.0 - 1e-12 {
        return Err(AnalysisError::Periodic { radius });
    }
    let z_inv = &(&DenseMatrix::identity(n) - p.matrix()) + &projector;
    let lu = Lu::new(&z_inv)?;
    let mean: f64 = mu.iter().zip(f).map(|(m, v)| m * v).sum();
    let centered: Vec<f64> = f.iter().map(|v| v - mean).collect();
    let zf = lu.solve(&centered);
    let var: f64 = (0..n)
        .map(|x| mu[x] * centered[x] * (2.0 * zf[x] - centered[x]))
        .sum();
    let scale: f64 = (0..n).map(|x| mu[x] * centered[x] * centered[x]).sum::<f64>();
    if var < -1e-10 * (1.0 + scale) {
        return Err(AnalysisError::NotProbability(format!("negative asymptotic variance {var:e}")));
    }
    Ok(var.max(0.0))
}

/// `G = λ(P − I)`, with the diagonal set from the off-diagonal mass so rows sum to zero.
pub fn uniformize(p: &StochasticMatrix, lambda: f64) -> GeneratorMatrix {
    assert!(lambda > 0.0, "uniformization rate must be positive");
    let n = p.n();
    let mut g = DenseMatrix::from_fn(n, n, |x, y| if x == y { 0.0 } else { lambda * p.get(x, y) });
    for x in 0..n {
        let off: f64 = g.row(x).iter().sum();
        g[(x, x)] = -off;
    }
    GeneratorMatrix(g)
}

const RATE_RANDOM_STARTS: usize = 8;
const RATE_GRAD_TOL: f64 = 1e-9;
const RATE_MAX_ITERS: usize = 2000;

/// Large-deviations rate function of the occupation measure,
/// `I_G(μ) = sup_{u>0} −Σ_x μ(x)(Gu)(x)/u(x)`.
///
/// The search runs over `u = exp(v)` restricted to the support of `μ`, with
/// `v` pinned to zero at the first support state. The objective is concave in
/// `v`; BFGS is started from `u = √(μ/π)` and from eight seeded random points,
/// keeping the best value.
pub fn ld_rate_function(g: &GeneratorMatrix, mu: &[f64]) -> Result<RateEvalResult, AnalysisError> {
    let n = g.n();
    if mu.len() != n {
        return Err(AnalysisError::NotProbability(format!("length {} for {n} states", mu.len())));
    }
    if mu.iter().any(|&m| !(m >= 0.0 && m.is_finite())) {
        return Err(AnalysisError::NotProbability("entries must be nonnegative".into()));
    }
    let total: f64 = mu.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(AnalysisError::NotProbability(format!("sums to {total}")));
    }
    let support: Vec<usize> = (0..n).filter(|&x| mu[x] > 0.0).collect();
    let objective = RateObjective::new(g, mu, &support);

    let pi = g.stationary_distribution()?;
    let u_star: Vec<f64> = support.iter().map(|&x| 0.5 * (mu[x] / pi[x]).ln()).collect();
    let pinned = |v: &[f64]| -> Vec<f64> { v[1..].iter().map(|w| w - v[0]).collect() };

    let mut starts = vec![pinned(&u_star)];
    let mut rng = SeededRng::new(0x005e_ed0f_1a7e);
    for _ in 0..RATE_RANDOM_STARTS {
        starts.push((1..support.len()).map(|_| rng.normal()).collect());
    }

    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    for start in starts {
        let (v, value, grad_norm) = bfgs_maximize(&objective, start);
        if !value.is_finite() {
            continue;
        }
        let converged = grad_norm <= RATE_GRAD_TOL;
        if best.as_ref().is_none_or(|(b, _, _)| value > *b) {
            best = Some((value, v, converged));
        }
    }
    let (value, v, converged) =
        best.ok_or_else(|| AnalysisError::NoConvergence("all starts diverged".into()))?;
    let mut maximizer = vec![0.0; n];
    maximizer[support[0]] = 1.0;
    for (k, &x) in support.iter().enumerate().skip(1) {
        maximizer[x] = v[k - 1].exp();
    }
    Ok(RateEvalResult { value: value.max(0.0), maximizer, converged })
}

/// `F(v) = −Σ_{x∈supp} μ(x)[G(x,x) + Σ_{y∈supp, y≠x} G(x,y) e^{v(y)−v(x)}]` with `v(supp[0]) = 0`.
struct RateObjective {
    weights: Vec<f64>,
    diag: Vec<f64>,
    rates: DenseMatrix,
}

impl RateObjective {
    fn new(g: &GeneratorMatrix, mu: &[f64], support: &[usize]) -> Self {
        let m = support.len();
        Self {
            weights: support.iter().map(|&x| mu[x]).collect(),
            diag: support.iter().map(|&x| g.get(x, x)).collect(),
            rates: DenseMatrix::from_fn(m, m, |a, b| if a == b { 0.0 } else { g.get(support[a], support[b]) }),
        }
    }

    fn full(&self, v: &[f64]) -> Vec<f64> {
        std::iter::once(0.0).chain(v.iter().copied()).collect()
    }

    fn value_grad(&self, v: &[f64]) -> (f64, Vec<f64>) {
        let w = self.full(v);
        let m = w.len();
        let mut value = 0.0;
        let mut grad = vec![0.0; m];
        for a in 0..m {
            value -= self.weights[a] * self.diag[a];
            for b in 0..m {
                let r = self.rates[(a, b)];
                if r == 0.0 {
                    continue;
                }
                let t = self.weights[a] * r * (w[b] - w[a]).exp();
                value -= t;
                grad[b] -= t;
                grad[a] += t;
            }
        }
        (value, grad[1..].to_vec())
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// BFGS ascent with Armijo backtracking. Returns `(v, F(v), ‖∇F‖∞)`.
fn bfgs_maximize(obj: &RateObjective, mut v: Vec<f64>) -> (Vec<f64>, f64, f64) {
    let d = v.len();
    let (mut f, mut g) = obj.value_grad(&v);
    if d == 0 {
        return (v, f, 0.0);
    }
    // inverse Hessian approximation of −F
    let mut h = DenseMatrix::identity(d);
    for _ in 0..RATE_MAX_ITERS {
        if inf_norm(&g) <= RATE_GRAD_TOL || !f.is_finite() {
            break;
        }
        let mut dir = h.matvec(&g);
        let mut slope: f64 = dir.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope <= 0.0 {
            h = DenseMatrix::identity(d);
            dir = g.clone();
            slope = g.iter().map(|x| x * x).sum();
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<f64> = v.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            let (fc, gc) = obj.value_grad(&cand);
            if fc.is_finite() && fc >= f + 1e-4 * step * slope {
                accepted = Some((cand, fc, gc));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, fc, gc)) = accepted else { break };
        let s: Vec<f64> = cand.iter().zip(&v).map(|(a, b)| a - b).collect();
        // y for the minimization of −F
        let y: Vec<f64> = g.iter().zip(&gc).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-300 {
            let hy = h.matvec(&y);
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            let rho = 1.0 / sy;
            h = DenseMatrix::from_fn(d, d, |i, j| {
                h[(i, j)] - rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j]
            });
        }
        v = cand;
        f = fc;
        g = gc;
    }
    let gn = inf_norm(&g);
    (v, f, gn)
}

/// Result of comparing the NRMH and additive constructions of one chain.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    /// NRMH with proposal `Q = H + diag(π)⁻¹Γ/2` and vorticity `Γ`.
    pub nrmh: StochasticMatrix,
    /// MH kernel for proposal `H`, plus `diag(π)⁻¹Γ/2`.
    pub additive: DenseMatrix,
    pub max_diff: f64,
}

pub fn equivalence_check(
    h: &StochasticMatrix,
    gamma: &VorticityMatrix,
    pi: &Distribution,
) -> Result<EquivalenceReport, AnalysisError> {
    let n = h.n();
    if gamma.n() != n || pi.len() != n {
        return Err(MarkovError::Dimension("kernel, vorticity and distribution sizes differ".into()).into());
    }
    let drift = DenseMatrix::from_fn(n, n, |x, y| gamma.get(x, y) / (2.0 * pi[x]));
    let q = StochasticMatrix::new(h.matrix() + &drift)?;
    let triple = make_compat_triple(q, gamma.clone(), pi.clone(), false)?;
    let p1 = nrmh_kernel(&triple);
    let k = mh_kernel(h, pi)?;
    let p2 = k.matrix() + &drift;
    let max_diff = p1.matrix().max_abs_diff(&p2);
    Ok(EquivalenceReport { nrmh: p1, additive: p2, max_diff })
}
