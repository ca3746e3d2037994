use num_complex::Complex64;

use super::{DenseMatrix, NumericsError};

const JACOBI_MAX_SWEEPS: usize = 100;
const QR_MAX_ITERATIONS: usize = 1000;

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: DenseMatrix,
}

impl SymEigen {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.vectors.rows()).map(|i| self.vectors[(i, k)]).collect()
    }

    /// `V·diag(f(λ))·Vᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        let n = self.values.len();
        let fl: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        DenseMatrix::from_fn(n, n, |i, j| (0..n).map(|k| v[(i, k)] * fl[k] * v[(j, k)]).sum())
            .symmetrized()
    }
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// Sweeps until the off-diagonal Frobenius norm drops below `1e-13·‖A‖_F`.
pub fn sym_eigen(a: &DenseMatrix) -> Result<SymEigen, NumericsError> {
    a.ensure_symmetric()?;
    let n = a.rows();
    let mut m = a.symmetrized();
    let mut v = DenseMatrix::identity(n);
    let tol = 1e-13 * a.frobenius();

    let off_norm = |m: &DenseMatrix| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)] * m[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off_norm(&m) <= tol;
    let mut sweep = 0;
    while !converged {
        if sweep == JACOBI_MAX_SWEEPS {
            return Err(NumericsError::NoConvergence {
                what: "Jacobi eigensolver",
                iterations: JACOBI_MAX_SWEEPS,
            });
        }
        sweep += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let tau = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = if tau.abs() > 1e150 {
                    0.5 / tau
                } else {
                    let sign = if tau >= 0.0 { 1.0 } else { -1.0 };
                    sign / (tau.abs() + (tau * tau + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        converged = off_norm(&m) <= tol;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(SymEigen { values, vectors })
}

/// Applies a scalar function to a symmetric matrix through its spectrum.
pub fn sym_matrix_function(
    a: &DenseMatrix,
    f: impl Fn(f64) -> f64,
) -> Result<DenseMatrix, NumericsError> {
    Ok(sym_eigen(a)?.reconstruct_with(f))
}

/// Operator 2-norm `√λ_max(AᵀA)`.
pub fn spectral_norm(a: &DenseMatrix) -> Result<f64, NumericsError> {
    let ata = (&a.transpose() * a).symmetrized();
    Ok(sym_eigen(&ata)?.max().max(0.0).sqrt())
}

/// Spectral bound (largest real part) and spectral radius (largest modulus).
pub fn spectral_bound_radius(a: &DenseMatrix) -> Result<(f64, f64), NumericsError> {
    let ev = eigenvalues(a)?;
    let s = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let r = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok((s, r))
}

/// All eigenvalues of a real square matrix: Householder reduction to upper
/// Hessenberg form followed by Francis double-shift QR.
pub fn eigenvalues(a: &DenseMatrix) -> Result<Vec<Complex64>, NumericsError> {
    a.ensure_square()?;
    let n = a.rows();
    if n == 1 {
        return Ok(vec![Complex64::new(a[(0, 0)], 0.0)]);
    }
    let h = hessenberg(a);
    hessenberg_qr(&h)
}

fn hessenberg(a: &DenseMatrix) -> DenseMatrix {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = (k + 1..n).map(|i| h[(i, k)] * h[(i, k)]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if h[(k + 1, k)] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= vnorm);
        // H ← (I − 2vvᵀ) H (I − 2vvᵀ) restricted to the trailing block.
        for j in 0..n {
            let dot: f64 = v.iter().enumerate().map(|(t, vt)| vt * h[(k + 1 + t, j)]).sum();
            for (t, vt) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= 2.0 * vt * dot;
            }
        }
        for i in 0..n {
            let dot: f64 = v.iter().enumerate().map(|(t, vt)| vt * h[(i, k + 1 + t)]).sum();
            for (t, vt) in v.iter().enumerate() {
                h[(i, k + 1 + t)] -= 2.0 * vt * dot;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = 0.0;
        }
    }
    h
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (EISPACK `hqr` scheme,
/// 1-based indexing internally to keep the index arithmetic recognisable).
fn hessenberg_qr(h: &DenseMatrix) -> Result<Vec<Complex64>, NumericsError> {
    let n = h.rows();
    let mut a = vec![vec![0.0f64; n + 1]; n + 1];
    for i in 1..=n {
        for j in 1..=n {
            a[i][j] = h[(i - 1, j - 1)];
        }
    }
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];

    let mut anorm = 0.0;
    for i in 1..=n {
        for j in (i.max(2) - 1)..=n {
            anorm += a[i][j].abs();
        }
    }

    let mut nn = n;
    let mut t = 0.0;
    let mut total_its = 0usize;
    let (mut p, mut q, mut r): (f64, f64, f64);
    let (mut x, mut y, mut z, mut w);
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a[nn][nn];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
                break;
            }
            y = a[nn - 1][nn - 1];
            w = a[nn][nn - 1] * a[nn - 1][nn];
            if l == nn - 1 {
                p = 0.5 * (y - x);
                q = p * p + w;
                z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + sign(z, p);
                    wr[nn - 1] = x + z;
                    wr[nn] = x + z;
                    if z != 0.0 {
                        wr[nn] = x - w / z;
                    }
                    wi[nn - 1] = 0.0;
                    wi[nn] = 0.0;
                } else {
                    wr[nn - 1] = x + p;
                    wr[nn] = x + p;
                    wi[nn - 1] = -z;
                    wi[nn] = z;
                }
                nn = nn.saturating_sub(2);
                break;
            }
            if total_its >= QR_MAX_ITERATIONS {
                return Err(NumericsError::NoConvergence {
                    what: "Hessenberg QR",
                    iterations: QR_MAX_ITERATIONS,
                });
            }
            if its > 0 && its % 10 == 0 {
                // exceptional shift
                t += x;
                for i in 1..=nn {
                    a[i][i] -= x;
                }
                let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            total_its += 1;
            let mut m = nn - 2;
            loop {
                z = a[m][m];
                r = x - z;
                let s0 = y - z;
                p = (r * s0 - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - r - s0;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                a[i][i - 2] = 0.0;
                if i != m + 2 {
                    a[i][i - 3] = 0.0;
                }
            }
            let mut k = m;
            while k < nn {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = 0.0;
                    if k != nn - 1 {
                        r = a[k + 2][k - 1];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        p = a[k][j] + q * a[k + 1][j];
                        if k != nn - 1 {
                            p += r * a[k + 2][j];
                            a[k + 2][j] -= p * z;
                        }
                        a[k + 1][j] -= p * y;
                        a[k][j] -= p * x;
                    }
                    let mmin = if nn < k + 3 { nn } else { k + 3 };
                    for i in l..=mmin {
                        p = x * a[i][k] + y * a[i][k + 1];
                        if k != nn - 1 {
                            p += z * a[i][k + 2];
                            a[i][k + 2] -= p * r;
                        }
                        a[i][k + 1] -= p * q;
                        a[i][k] -= p;
                    }
                }
                k += 1;
            }
            if l >= nn - 1 {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
}

/// Right and left eigenvectors for a (simple) eigenvalue `lambda` of `a`, by
/// complex inverse iteration: `A·v = λv`, `uᵀ·A = λuᵀ`.
pub fn right_left_eigenvectors(
    a: &DenseMatrix,
    lambda: Complex64,
) -> Result<(Vec<Complex64>, Vec<Complex64>), NumericsError> {
    a.ensure_square()?;
    let n = a.rows();
    let scale = a.max_abs().max(1.0);
    // Nudge off the exact eigenvalue so the shifted matrix stays invertible.
    let shift = lambda + Complex64::new(1e-10 * scale, 1e-10 * scale);
    let to_complex = |m: &DenseMatrix| -> Vec<Vec<Complex64>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let d = if i == j { shift } else { Complex64::new(0.0, 0.0) };
                        Complex64::new(m[(i, j)], 0.0) - d
                    })
                    .collect()
            })
            .collect()
    };
    let right = inverse_iteration(to_complex(a))?;
    let left = inverse_iteration(to_complex(&a.transpose()))?;
    Ok((right, left))
}

fn inverse_iteration(mut m: Vec<Vec<Complex64>>) -> Result<Vec<Complex64>, NumericsError> {
    let n = m.len();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i][k].norm().total_cmp(&m[j][k].norm()))
            .expect("non-empty range");
        if m[p][k].norm() == 0.0 {
            m[p][k] = Complex64::new(f64::EPSILON, 0.0);
        }
        m.swap(k, p);
        perm.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            m[i][k] = f;
            for j in k + 1..n {
                let mkj = m[k][j];
                m[i][j] -= f * mkj;
            }
        }
    }
    let solve = |b: &[Complex64]| -> Vec<Complex64> {
        let mut x: Vec<Complex64> = perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let xk = x[k];
                x[i] -= m[i][k] * xk;
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let xk = x[k];
                x[i] -= m[i][k] * xk;
            }
            x[i] /= m[i][i];
        }
        x
    };
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0, 0.1 * (i as f64 + 1.0)))
        .collect();
    for _ in 0..4 {
        v = solve(&v);
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(NumericsError::NoConvergence { what: "inverse iteration", iterations: 4 });
        }
        v.iter_mut().for_each(|z| *z /= norm);
    }
    Ok(v)
}
