//! Dense small-matrix linear algebra.
//!
//! Everything here is written for the matrix sizes this crate deals with
//! (a handful up to a few dozen rows): Cholesky and LU factorizations, a cyclic
//! Jacobi symmetric eigensolver, Hessenberg + shifted QR for general spectra,
//! and a discrete Lyapunov solver.

mod decomp;
mod eigen;
mod lyapunov;
mod matrix;

use thiserror::Error;

pub use decomp::{cholesky, Cholesky, Lu};
pub use eigen::{
    eigenvalues, right_left_eigenvectors, spectral_bound_radius, spectral_norm, sym_eigen,
    sym_matrix_function, SymEigen,
};
pub use lyapunov::solve_discrete_lyapunov;
pub use matrix::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },
    #[error("spectral radius {radius} is not below 1")]
    UnstableMatrix { radius: f64 },
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch { expected: (usize, usize), found: (usize, usize) },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("non-finite entry")]
    NonFinite,
}
