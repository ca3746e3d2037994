//! Finite-state non-reversible Metropolis-Hastings.
//!
//! A chain `P` with invariant distribution `π` has vorticity
//! `Γ(x,y) = π(x)P(x,y) − π(y)P(y,x)`. Starting from a proposal `Q`, a target `π`
//! and a prescribed vorticity matrix `Γ` that satisfy the compatibility
//! conditions, [`nrmh_kernel`] builds the chain with invariant distribution `π`
//! and vorticity exactly `Γ`. With `Γ = 0` it is classical Metropolis-Hastings.

use thiserror::Error;

use crate::numerics::DenseMatrix;
use crate::rng::SeededRng;

/// Row sums and skew checks use this absolute tolerance.
pub const STOCHASTIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarkovError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("distribution weight {index} is {value}; weights must be positive and finite")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("invalid stochastic matrix: {0}")]
    NotStochastic(String),
    #[error("not a vorticity matrix: {0}")]
    NotVorticity(String),
    #[error("proposal violates the symmetric structure condition at ({0}, {1})")]
    SymmetricStructureViolated(usize, usize),
    #[error("vorticity bound Γ(x,y) ≥ −π(y)Q(y,x) violated at ({0}, {1})")]
    VorticityBoundViolated(usize, usize),
    #[error("distribution is not invariant for the chain (residual {residual:e})")]
    NotInvariant { residual: f64 },
    #[error("kernel is not reversible with respect to the distribution (residual {residual:e})")]
    NotReversible { residual: f64 },
    #[error("additive construction yields a negative entry at ({0}, {1})")]
    NegativeEntry(usize, usize),
}

/// Positive weights over a finite state space, not necessarily normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(weights: Vec<f64>) -> Result<Self, MarkovError> {
        if weights.is_empty() {
            return Err(MarkovError::Dimension("empty distribution".into()));
        }
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(MarkovError::NonPositiveWeight { index, value });
        }
        Ok(Self(weights))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn normalized(&self) -> Vec<f64> {
        let t = self.total();
        self.0.iter().map(|w| w / t).collect()
    }

    /// `max_y |Σ_x π(x)P(x,y) − π(y)| / Σπ`.
    pub fn invariance_residual(&self, p: &StochasticMatrix) -> f64 {
        let flow = p.matrix().vecmat(&self.0);
        let t = self.total();
        flow.iter().zip(&self.0).fold(0.0, |m, (f, w)| m.max((f - w).abs() / t))
    }
}

impl std::ops::Index<usize> for Distribution {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Square row-stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix(DenseMatrix);

impl StochasticMatrix {
    pub fn new(m: DenseMatrix) -> Result<Self, MarkovError> {
        if !m.is_square() {
            return Err(MarkovError::NotStochastic(format!("{}x{} is not square", m.rows(), m.cols())));
        }
        for i in 0..m.rows() {
            let row = m.row(i);
            if let Some(j) = row.iter().position(|&v| v < 0.0) {
                return Err(MarkovError::NotStochastic(format!("negative entry at ({i}, {j})")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(MarkovError::NotStochastic(format!("row {i} sums to {sum}")));
            }
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(DenseMatrix::identity(n))
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.0
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.0[(x, y)]
    }

    /// `max_{x,y} |π(x)P(x,y) − π(y)P(y,x)| / Σπ`.
    pub fn detailed_balance_residual(&self, pi: &Distribution) -> f64 {
        raw_vorticity(self, pi).max_abs() / pi.total()
    }
}

/// Skew-symmetric matrix with zero row sums.
///
/// Only the strict upper triangle is stored, so skew-symmetry holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct VorticityMatrix {
    n: usize,
    upper: Vec<f64>,
}

impl VorticityMatrix {
    pub fn zero(n: usize) -> Self {
        Self { n, upper: vec![0.0; n * n.saturating_sub(1) / 2] }
    }

    /// Takes the strict upper triangle of `m`; rejects `m` unless it is skew and has zero row sums.
    pub fn from_matrix(m: &DenseMatrix) -> Result<Self, MarkovError> {
        if !m.is_square() {
            return Err(MarkovError::NotVorticity("not square".into()));
        }
        let n = m.rows();
        let tol = STOCHASTIC_TOL * (1.0 + m.max_abs());
        for i in 0..n {
            if m[(i, i)].abs() > tol {
                return Err(MarkovError::NotVorticity(format!("nonzero diagonal at {i}")));
            }
            for j in i + 1..n {
                if (m[(i, j)] + m[(j, i)]).abs() > tol {
                    return Err(MarkovError::NotVorticity(format!("not skew at ({i}, {j})")));
                }
            }
        }
        let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                upper.push(m[(i, j)]);
            }
        }
        let g = Self { n, upper };
        g.check_row_sums()?;
        Ok(g)
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j);
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    fn check_row_sums(&self) -> Result<(), MarkovError> {
        let scale = 1.0 + self.upper.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (i, s) in self.row_sums().iter().enumerate() {
            if s.abs() > STOCHASTIC_TOL * scale {
                return Err(MarkovError::NotVorticity(format!("row {i} sums to {s:e}")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Less => self.upper[self.idx(i, j)],
            Greater => -self.upper[self.idx(j, i)],
            Equal => 0.0,
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).sum()).collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self { n: self.n, upper: self.upper.iter().map(|v| v * t).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(|&v| v == 0.0)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n);
        self.upper.iter().zip(&other.upper).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// A validated compatible combination of proposal, vorticity and target.
#[derive(Debug, Clone)]
pub struct CompatTriple {
    q: StochasticMatrix,
    gamma: VorticityMatrix,
    pi: Distribution,
    strict: bool,
}

impl CompatTriple {
    pub fn proposal(&self) -> &StochasticMatrix {
        &self.q
    }

    pub fn vorticity(&self) -> &VorticityMatrix {
        &self.gamma
    }

    pub fn target(&self) -> &Distribution {
        &self.pi
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    /// The non-reversible Hastings ratio `R_Γ(x,y)`.
    pub fn hastings_ratio(&self, x: usize, y: usize) -> f64 {
        let forward = self.pi[x] * self.q.get(x, y);
        if forward == 0.0 {
            return 1.0;
        }
        (self.gamma.get(x, y) + self.pi[y] * self.q.get(y, x)) / forward
    }
}

/// `Q(y,x) = 0` exactly when `Q(x,y) = 0`.
pub fn check_symmetric_structure(q: &StochasticMatrix) -> bool {
    first_structure_violation(q).is_none()
}

fn first_structure_violation(q: &StochasticMatrix) -> Option<(usize, usize)> {
    let n = q.n();
    for x in 0..n {
        for y in 0..n {
            if (q.get(x, y) == 0.0) != (q.get(y, x) == 0.0) {
                return Some((x, y));
            }
        }
    }
    None
}

pub fn make_compat_triple(
    q: StochasticMatrix,
    gamma: VorticityMatrix,
    pi: Distribution,
    strict: bool,
) -> Result<CompatTriple, MarkovError> {
    let n = q.n();
    if gamma.n() != n || pi.len() != n {
        return Err(MarkovError::Dimension(format!(
            "proposal {n} states, vorticity {}, distribution {}",
            gamma.n(),
            pi.len()
        )));
    }
    gamma.check_row_sums()?;
    if let Some((x, y)) = first_structure_violation(&q) {
        return Err(MarkovError::SymmetricStructureViolated(x, y));
    }
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let g = gamma.get(x, y);
            let bound = -pi[y] * q.get(y, x);
            let ok = if strict && q.get(y, x) != 0.0 { g > bound } else { g >= bound };
            if !ok {
                return Err(MarkovError::VorticityBoundViolated(x, y));
            }
        }
    }
    Ok(CompatTriple { q, gamma, pi, strict })
}

/// Classical Metropolis-Hastings kernel for proposal `q` and target `pi`.
pub fn mh_kernel(q: &StochasticMatrix, pi: &Distribution) -> Result<StochasticMatrix, MarkovError> {
    let triple = make_compat_triple(q.clone(), VorticityMatrix::zero(q.n()), pi.clone(), false)?;
    Ok(nrmh_kernel(&triple))
}

/// Non-reversible Metropolis-Hastings kernel `P_Γ`.
///
/// Off-diagonal entries are `Q(x,y)·min(1, R_Γ(x,y))`; the diagonal takes the
/// remaining mass so every row sums to one.
pub fn nrmh_kernel(t: &CompatTriple) -> StochasticMatrix {
    let n = t.q.n();
    let mut p = DenseMatrix::zeros(n, n);
    for x in 0..n {
        let mut off = 0.0;
        for y in 0..n {
            if x == y {
                continue;
            }
            let qxy = t.q.get(x, y);
            if qxy == 0.0 {
                continue;
            }
            let v = qxy * t.hastings_ratio(x, y).clamp(0.0, 1.0);
            p[(x, y)] = v;
            off += v;
        }
        p[(x, x)] = (1.0 - off).max(0.0);
    }
    StochasticMatrix(p)
}

/// `diag(π)P − Pᵀdiag(π)` without checking invariance.
pub fn raw_vorticity(p: &StochasticMatrix, pi: &Distribution) -> DenseMatrix {
    let n = p.n();
    DenseMatrix::from_fn(n, n, |x, y| pi[x] * p.get(x, y) - pi[y] * p.get(y, x))
}

/// Vorticity of `(P, π)`; errors unless `π` is invariant for `P`.
pub fn vorticity_of(p: &StochasticMatrix, pi: &Distribution) -> Result<VorticityMatrix, MarkovError> {
    check_dims(p, pi)?;
    let raw = raw_vorticity(p, pi);
    let residual = raw
        .matvec(&vec![1.0; p.n()])
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        / pi.total();
    if residual > STOCHASTIC_TOL {
        return Err(MarkovError::NotInvariant { residual });
    }
    let n = p.n();
    let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            upper.push(raw[(i, j)]);
        }
    }
    Ok(VorticityMatrix { n, upper })
}

/// Time reversal `P̂(x,y) = π(y)P(y,x)/π(x)`.
pub fn time_reversal(p: &StochasticMatrix, pi: &Distribution) -> Result<StochasticMatrix, MarkovError> {
    check_dims(p, pi)?;
    let residual = pi.invariance_residual(p);
    if residual > STOCHASTIC_TOL {
        return Err(MarkovError::NotInvariant { residual });
    }
    let n = p.n();
    let mut r = DenseMatrix::from_fn(n, n, |x, y| if x == y { 0.0 } else { pi[y] * p.get(y, x) / pi[x] });
    for x in 0..n {
        let off: f64 = r.row(x).iter().sum();
        r[(x, x)] = (1.0 - off).max(0.0);
    }
    StochasticMatrix::new(r)
}

/// `P(x,y) = K(x,y) + Γ(x,y)/(2π(x))` for reversible `K`.
pub fn additive_kernel(
    k: &StochasticMatrix,
    gamma: &VorticityMatrix,
    pi: &Distribution,
) -> Result<StochasticMatrix, MarkovError> {
    check_dims(k, pi)?;
    if gamma.n() != k.n() {
        return Err(MarkovError::Dimension("vorticity size differs from kernel".into()));
    }
    let residual = k.detailed_balance_residual(pi);
    if residual > STOCHASTIC_TOL {
        return Err(MarkovError::NotReversible { residual });
    }
    let n = k.n();
    let mut p = DenseMatrix::zeros(n, n);
    for x in 0..n {
        let mut off = 0.0;
        for y in 0..n {
            if x == y {
                continue;
            }
            let v = k.get(x, y) + gamma.get(x, y) / (2.0 * pi[x]);
            if v < 0.0 {
                return Err(MarkovError::NegativeEntry(x, y));
            }
            p[(x, y)] = v;
            off += v;
        }
        let d = 1.0 - off;
        if d < -STOCHASTIC_TOL {
            return Err(MarkovError::NegativeEntry(x, x));
        }
        p[(x, x)] = d.max(0.0);
    }
    Ok(StochasticMatrix(p))
}

fn check_dims(p: &StochasticMatrix, pi: &Distribution) -> Result<(), MarkovError> {
    if p.n() != pi.len() {
        return Err(MarkovError::Dimension(format!(
            "chain has {} states, distribution {}",
            p.n(),
            pi.len()
        )));
    }
    Ok(())
}

/// Samples a path of `len` states starting at `x0` (included as the first state).
pub fn sample_chain(p: &StochasticMatrix, x0: usize, len: usize, seed: u64) -> Vec<usize> {
    assert!(x0 < p.n(), "start state out of range");
    let mut rng = SeededRng::new(seed);
    let mut path = Vec::with_capacity(len);
    let mut x = x0;
    for _ in 0..len {
        path.push(x);
        let u = rng.uniform();
        let row = p.matrix().row(x);
        let mut acc = 0.0;
        let mut next = row.len() - 1;
        for (y, &w) in row.iter().enumerate() {
            acc += w;
            if u < acc {
                next = y;
                break;
            }
        }
        // guard against the rounding tail landing on a zero-probability state
        while row[next] == 0.0 && next > 0 {
            next -= 1;
        }
        x = next;
    }
    path
}
