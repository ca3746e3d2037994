//! Random finite-state problem instances: targets, proposals with symmetric
//! structure, and vorticity matrices that respect the compatibility bounds.

use crate::markov::{
    make_compat_triple, mh_kernel, CompatTriple, Distribution, StochasticMatrix, VorticityMatrix,
};
use crate::numerics::DenseMatrix;
use crate::rng::SeededRng;

fn between(rng: &mut SeededRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.uniform()
}

/// Normalized distribution with weights drawn from `[0.2, 1)`.
pub fn random_distribution(n: usize, rng: &mut SeededRng) -> Distribution {
    let w: Vec<f64> = (0..n).map(|_| between(rng, 0.2, 1.0)).collect();
    let total: f64 = w.iter().sum();
    Distribution::new(w.iter().map(|v| v / total).collect()).expect("positive weights")
}

/// Row-stochastic proposal with symmetric zero pattern, a connecting ring of
/// edges, and self-loop mass of at least a few percent.
pub fn random_proposal(n: usize, rng: &mut SeededRng) -> StochasticMatrix {
    let mut support = vec![vec![false; n]; n];
    for x in 0..n {
        for y in x + 1..n {
            let on = y == x + 1 || rng.uniform() < 0.6;
            support[x][y] = on;
            support[y][x] = on;
        }
    }
    let mut m = DenseMatrix::zeros(n, n);
    for x in 0..n {
        for y in 0..n {
            if x == y {
                m[(x, y)] = between(rng, 0.2, 1.0);
            } else if support[x][y] {
                m[(x, y)] = between(rng, 0.1, 1.0);
            }
        }
        let total: f64 = m.row(x).iter().sum();
        for v in m.row_mut(x) {
            *v /= total;
        }
    }
    StochasticMatrix::new(m).expect("normalized rows")
}

/// A random combination of 3-cycles on the support of `h`, scaled to a random
/// fraction in `[0.1, 0.95)` of the largest multiple satisfying both
/// `Γ(x,y) ≥ −π(y)H(y,x)` and `Γ(x,y) ≥ −2π(x)H(x,y)`.
///
/// The first bound makes `(H, Γ, π)` compatible; the second keeps
/// `H + diag(π)⁻¹Γ/2` nonnegative. Zero when the support has no triangle.
pub fn random_vorticity(h: &StochasticMatrix, pi: &Distribution, rng: &mut SeededRng) -> VorticityMatrix {
    let n = h.n();
    let mut g = DenseMatrix::zeros(n, n);
    let on = |x: usize, y: usize| h.get(x, y) > 0.0;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if on(a, b) && on(b, c) && on(a, c) {
                    let w = between(rng, -1.0, 1.0);
                    for (x, y) in [(a, b), (b, c), (c, a)] {
                        g[(x, y)] += w;
                        g[(y, x)] -= w;
                    }
                }
            }
        }
    }
    let mut limit = f64::INFINITY;
    for x in 0..n {
        for y in 0..n {
            if g[(x, y)] < 0.0 {
                let room = (pi[y] * h.get(y, x)).min(2.0 * pi[x] * h.get(x, y));
                limit = limit.min(room / -g[(x, y)]);
            }
        }
    }
    if !limit.is_finite() {
        return VorticityMatrix::zero(n);
    }
    let scaled = g.scale(limit * between(rng, 0.1, 0.95));
    VorticityMatrix::from_matrix(&scaled).expect("3-cycles have zero row sums")
}

/// Compatible (strict) triple on `n` states.
pub fn random_compatible_triple(n: usize, rng: &mut SeededRng) -> CompatTriple {
    let pi = random_distribution(n, rng);
    let q = random_proposal(n, rng);
    let gamma = random_vorticity(&q, &pi, rng);
    make_compat_triple(q, gamma, pi, true).expect("vorticity scaled into the compatible range")
}

/// Reversible kernel (Metropolis-Hastings on a random proposal) with its target.
pub fn random_reversible_kernel(n: usize, rng: &mut SeededRng) -> (StochasticMatrix, Distribution) {
    let pi = random_distribution(n, rng);
    let q = random_proposal(n, rng);
    let k = mh_kernel(&q, &pi).expect("zero vorticity is always compatible");
    (k, pi)
}

/// Standard normal function values.
pub fn random_function(n: usize, rng: &mut SeededRng) -> Vec<f64> {
    (0..n).map(|_| rng.normal()).collect()
}

/// Probability vector with full support, drawn uniformly from the simplex.
pub fn random_probability(n: usize, rng: &mut SeededRng) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.uniform()).ln()).collect();
    let total: f64 = e.iter().sum();
    e.iter().map(|v| v / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triples_are_valid_across_sizes() {
        let mut rng = SeededRng::new(1);
        let mut nonzero = 0;
        for n in 2..=8 {
            for _ in 0..20 {
                let t = random_compatible_triple(n, &mut rng);
                if !t.vorticity().is_zero() {
                    nonzero += 1;
                }
            }
        }
        assert!(nonzero > 80);
    }

    #[test]
    fn reversible_kernel_satisfies_detailed_balance() {
        let mut rng = SeededRng::new(2);
        let (k, pi) = random_reversible_kernel(5, &mut rng);
        assert!(k.detailed_balance_residual(&pi) < 1e-15);
    }
}
