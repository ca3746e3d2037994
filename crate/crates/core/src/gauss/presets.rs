//! Benchmark configurations: a 3-dimensional target with a known optimal
//! skew matrix, and a 9-dimensional diagonal target.

use crate::numerics::DenseMatrix;

/// `diag(1, 1, 1/4)`.
pub fn benchmark_3d_covariance() -> DenseMatrix {
    DenseMatrix::from_diag(&[1.0, 1.0, 0.25])
}

/// Skew matrix making every eigenvalue of `−(I + S)V⁻¹` have real part `−2`
/// for [`benchmark_3d_covariance`].
pub fn benchmark_3d_skew() -> DenseMatrix {
    let r3 = 3f64.sqrt();
    DenseMatrix::from_rows(&[vec![0.0, r3, 1.0], vec![-r3, 0.0, 1.0], vec![-1.0, -1.0, 0.0]])
}

pub const BENCHMARK_9D_DIAG: [f64; 9] =
    [0.8147, 0.9058, 0.1270, 0.9134, 0.6324, 0.0975, 0.2785, 0.5469, 0.9575];

pub fn benchmark_9d_covariance() -> DenseMatrix {
    DenseMatrix::from_diag(&BENCHMARK_9D_DIAG)
}
