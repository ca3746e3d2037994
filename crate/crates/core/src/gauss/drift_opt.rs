use std::thread;

use num_complex::Complex64;

use super::{GaussianError, GaussianTarget, SkewDrift};
use crate::numerics::{eigenvalues, right_left_eigenvectors, DenseMatrix};
use crate::rng::{derive_seed, SeededRng};

/// Search effort for [`optimize_skew_drift`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftBudget {
    pub restarts: usize,
    /// Gradient steps per restart.
    pub iterations: usize,
    pub seed: u64,
    /// Standard deviation of the random starting entries of `S`.
    pub init_scale: f64,
}

impl Default for DriftBudget {
    fn default() -> Self {
        Self { restarts: 32, iterations: 3000, seed: 0, init_scale: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct DriftOptimum {
    pub drift: SkewDrift,
    /// Achieved `s(−(I + S)V⁻¹)`.
    pub spectral_bound: f64,
    /// The lower limit `−tr(V⁻¹)/n` (the trace of `B` does not depend on `S`).
    pub optimal_bound: f64,
    /// `s(−V⁻¹)`, i.e. `S = 0`.
    pub reversible_bound: f64,
}

impl DriftOptimum {
    /// Relative gap `(s − s*)/|s*|` to the optimal bound.
    pub fn relative_gap(&self) -> f64 {
        (self.spectral_bound - self.optimal_bound) / self.optimal_bound.abs()
    }
}

const T_START: f64 = 1.0;
const T_FINAL: f64 = 1e3;
const T_STAGES: usize = 8;
const ARMIJO: f64 = 1e-4;

struct Objective<'a> {
    n: usize,
    vinv: &'a DenseMatrix,
    pairs: Vec<(usize, usize)>,
}

struct Eval {
    smooth: f64,
    bound: f64,
    grad: Vec<f64>,
}

impl Objective<'_> {
    fn b(&self, p: &[f64]) -> DenseMatrix {
        let mut ips = DenseMatrix::identity(self.n);
        for (&(i, j), &v) in self.pairs.iter().zip(p) {
            ips[(i, j)] = v;
            ips[(j, i)] = -v;
        }
        -&(&ips * self.vinv)
    }

    fn spectrum(&self, p: &[f64]) -> Option<(DenseMatrix, Vec<Complex64>)> {
        let b = self.b(p);
        let ev = eigenvalues(&b).ok()?;
        Some((b, ev))
    }

    /// `T⁻¹ log Σ exp(T·Re λ_k)` with its softmax weights.
    fn smooth_max(ev: &[Complex64], t: f64) -> (f64, f64, Vec<f64>) {
        let m = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = ev.iter().map(|z| (t * (z.re - m)).exp()).collect();
        let total: f64 = w.iter().sum();
        (m + total.ln() / t, m, w.iter().map(|v| v / total).collect())
    }

    fn value(&self, p: &[f64], t: f64) -> Option<(f64, f64)> {
        let (_, ev) = self.spectrum(p)?;
        let (smooth, bound, _) = Self::smooth_max(&ev, t);
        Some((smooth, bound))
    }

    fn eval(&self, p: &[f64], t: f64) -> Option<Eval> {
        let (b, ev) = self.spectrum(p)?;
        let (smooth, bound, weights) = Self::smooth_max(&ev, t);
        let grad = self.eigen_gradient(&b, &ev, &weights).unwrap_or_else(|| self.fd_gradient(p, t));
        Some(Eval { smooth, bound, grad })
    }

    /// `∂λ/∂p_ij = −(u_i w_j − u_j w_i)/(uᵀv)` with `w = V⁻¹v`, from
    /// `∂B/∂p_ij = −(E_ij − E_ji)V⁻¹`.
    fn eigen_gradient(&self, b: &DenseMatrix, ev: &[Complex64], weights: &[f64]) -> Option<Vec<f64>> {
        let mut grad = vec![0.0; self.pairs.len()];
        for (lambda, &wk) in ev.iter().zip(weights) {
            if wk < 1e-14 {
                continue;
            }
            let (v, u) = right_left_eigenvectors(b, *lambda).ok()?;
            let denom: Complex64 = u.iter().zip(&v).map(|(a, c)| a * c).sum();
            if denom.norm() < 1e-10 {
                return None;
            }
            let w: Vec<Complex64> = (0..self.n)
                .map(|i| (0..self.n).map(|j| v[j] * self.vinv[(i, j)]).sum())
                .collect();
            for (g, &(i, j)) in grad.iter_mut().zip(&self.pairs) {
                *g -= wk * ((u[i] * w[j] - u[j] * w[i]) / denom).re;
            }
        }
        grad.iter().all(|g| g.is_finite()).then_some(grad)
    }

    fn fd_gradient(&self, p: &[f64], t: f64) -> Vec<f64> {
        let mut q = p.to_vec();
        (0..p.len())
            .map(|k| {
                let step = 1e-6 * (1.0 + p[k].abs());
                q[k] = p[k] + step;
                let up = self.value(&q, t).map_or(f64::NAN, |v| v.0);
                q[k] = p[k] - step;
                let down = self.value(&q, t).map_or(f64::NAN, |v| v.0);
                q[k] = p[k];
                let g = (up - down) / (2.0 * step);
                if g.is_finite() {
                    g
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Armijo-backtracked gradient descent on the smoothed bound with a
    /// temperature schedule rising geometrically from `T_START` to `T_FINAL`.
    /// Returns the point with the smallest true spectral bound seen, stopping
    /// early once that bound is within `1e-6` (relative) of `floor`.
    fn descend(&self, mut p: Vec<f64>, iterations: usize, floor: f64) -> (Vec<f64>, f64) {
        let done = |bound: f64| bound <= floor + 1e-6 * floor.abs();
        let stage_len = (iterations / T_STAGES).max(1);
        let ratio = (T_FINAL / T_START).powf(1.0 / (T_STAGES - 1) as f64);
        let mut t = T_START;
        let Some(mut cur) = self.eval(&p, t) else {
            return (p, f64::INFINITY);
        };
        let mut best = (p.clone(), cur.bound);
        let mut step = 0.1;
        for it in 0..iterations {
            if it > 0 && it % stage_len == 0 && t < T_FINAL {
                t = (t * ratio).min(T_FINAL);
                match self.eval(&p, t) {
                    Some(e) => cur = e,
                    None => break,
                }
            }
            let g2: f64 = cur.grad.iter().map(|g| g * g).sum();
            if g2 == 0.0 {
                continue;
            }
            let mut accepted = None;
            while step > 1e-12 {
                let trial: Vec<f64> = p.iter().zip(&cur.grad).map(|(a, g)| a - step * g).collect();
                if let Some((smooth, _)) = self.value(&trial, t) {
                    if smooth <= cur.smooth - ARMIJO * step * g2 {
                        accepted = self.eval(&trial, t).map(|e| (trial, e));
                        break;
                    }
                }
                step *= 0.5;
            }
            let Some((trial, e)) = accepted else {
                step = 1e-3;
                continue;
            };
            p = trial;
            cur = e;
            if cur.bound < best.1 {
                best = (p.clone(), cur.bound);
                if done(best.1) {
                    break;
                }
            }
            step *= 2.0;
        }
        best
    }
}

/// Searches for a skew-symmetric `S` minimizing the spectral bound of
/// `B = −(I + S)V⁻¹`, i.e. the slowest exponential rate of the drift.
///
/// The bound cannot go below `−tr(V⁻¹)/n`. Each restart descends on a
/// log-sum-exp smoothing of the eigenvalue real parts; the result is never
/// worse than `S = 0`.
pub fn optimize_skew_drift(target: &GaussianTarget, budget: &DriftBudget) -> Result<DriftOptimum, GaussianError> {
    let n = target.dim();
    let vinv = target.precision();
    let optimal_bound = -vinv.trace() / n as f64;
    let zero = SkewDrift::zero(target);
    let reversible_bound = zero.spectral_bound()?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    if pairs.is_empty() || budget.restarts == 0 {
        return Ok(DriftOptimum { drift: zero, spectral_bound: reversible_bound, optimal_bound, reversible_bound });
    }
    let obj = Objective { n, vinv, pairs };

    let workers = thread::available_parallelism().map_or(1, |w| w.get()).min(budget.restarts);
    let results: Vec<(usize, Vec<f64>, f64)> = thread::scope(|s| {
        let obj = &obj;
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                s.spawn(move || {
                    (w..budget.restarts)
                        .step_by(workers)
                        .map(|r| {
                            let mut rng = SeededRng::new(derive_seed(budget.seed, r as u64));
                            let start: Vec<f64> =
                                (0..obj.pairs.len()).map(|_| budget.init_scale * rng.normal()).collect();
                            let (p, bound) = obj.descend(start, budget.iterations, optimal_bound);
                            (r, p, bound)
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("optimizer worker panicked")).collect()
    });

    let mut best = (zero, reversible_bound);
    let mut ordered = results;
    ordered.sort_by_key(|r| r.0);
    for (_, p, bound) in ordered {
        if bound < best.1 {
            let drift = SkewDrift::from_upper(target, &p)?;
            let exact = drift.spectral_bound()?;
            if exact < best.1 {
                best = (drift, exact);
            }
        }
    }
    Ok(DriftOptimum { drift: best.0, spectral_bound: best.1, optimal_bound, reversible_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::spectral_bound_radius;

    #[test]
    fn identity_needs_no_skew() {
        let t = GaussianTarget::from_diag(&[1.0, 1.0, 1.0]).unwrap();
        let budget = DriftBudget { restarts: 2, iterations: 50, ..Default::default() };
        let opt = optimize_skew_drift(&t, &budget).unwrap();
        assert!((opt.optimal_bound + 1.0).abs() < 1e-15);
        assert!((opt.spectral_bound + 1.0).abs() < 1e-9);
    }

    #[test]
    fn eigen_gradient_matches_finite_differences() {
        let t = GaussianTarget::from_diag(&[1.0, 0.5, 0.2, 0.8]).unwrap();
        let pairs: Vec<(usize, usize)> = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))).collect();
        let obj = Objective { n: 4, vinv: t.precision(), pairs };
        let p = [0.3, -0.7, 1.1, 0.2, -0.4, 0.9];
        for &temp in &[1.0, 10.0] {
            let (b, ev) = obj.spectrum(&p).unwrap();
            let (_, _, w) = Objective::smooth_max(&ev, temp);
            let g = obj.eigen_gradient(&b, &ev, &w).unwrap();
            let fd = obj.fd_gradient(&p, temp);
            for (a, c) in g.iter().zip(&fd) {
                assert!((a - c).abs() < 1e-6 * (1.0 + c.abs()), "{a} vs {c}");
            }
        }
    }

    #[test]
    fn two_dimensional_optimum_is_reached() {
        let t = GaussianTarget::from_diag(&[1.0, 0.25]).unwrap();
        let opt = optimize_skew_drift(&t, &DriftBudget { restarts: 4, iterations: 800, ..Default::default() }).unwrap();
        assert!((opt.optimal_bound + 2.5).abs() < 1e-15);
        assert!(opt.relative_gap() < 0.01, "gap {}", opt.relative_gap());
        assert!(opt.spectral_bound <= opt.reversible_bound);
        let (s, _) = spectral_bound_radius(opt.drift.b()).unwrap();
        assert_eq!(s, opt.spectral_bound);
    }
}
