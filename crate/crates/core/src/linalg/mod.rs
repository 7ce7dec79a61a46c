//! Dense numerical kernels: factorizations, eigenvalue solvers and rank
//! checks. Everything is plain `f64`/`Complex64` row-major storage; the
//! matrices in play are small enough that dense O(n^3) methods win on
//! simplicity.

mod cholesky;
mod jacobi;
mod lu;
mod matrix;
mod qr_eigen;

use std::fmt;

pub use cholesky::{forward_substitute, Cholesky, SYMMETRY_TOL};
pub use jacobi::{
    gen_eig_bounds, gen_eigenvalues, rank_full_column, sym_eig_bounds, symmetric_eigen,
    symmetric_eigenvalues, RANK_TOL,
};
pub use lu::{CLu, Lu};
pub use matrix::{sup_distance, sup_norm, CMatrix, Matrix};
pub use qr_eigen::{
    eigenvalues, eigenvalues_complex, spectral_radius, spectral_radius_complex,
    QR_STEP_BUDGET_FACTOR,
};

/// Errors raised by the dense kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    /// Input shape does not fit the operation.
    DimensionMismatch {
        context: &'static str,
        rows: usize,
        cols: usize,
    },
    /// Construction saw a NaN or infinity.
    NonFiniteEntry,
    /// Matrix deviates from symmetry beyond tolerance.
    NotSymmetric { deviation: f64 },
    /// A Cholesky pivot was non-positive.
    NotSpd { pivot: usize },
    /// An LU pivot collapsed.
    Singular { pivot: usize },
    /// Iterative eigensolver exhausted its budget.
    NoConvergence { iterations: usize },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::DimensionMismatch { context, rows, cols } => {
                write!(f, "dimension mismatch in {context}: {rows}x{cols}")
            }
            LinalgError::NonFiniteEntry => write!(f, "non-finite matrix entry"),
            LinalgError::NotSymmetric { deviation } => {
                write!(f, "matrix is not symmetric (relative deviation {deviation:.3e})")
            }
            LinalgError::NotSpd { pivot } => {
                write!(f, "matrix is not positive definite (pivot {pivot})")
            }
            LinalgError::Singular { pivot } => write!(f, "singular matrix (pivot {pivot})"),
            LinalgError::NoConvergence { iterations } => {
                write!(f, "eigensolver did not converge within {iterations} steps")
            }
        }
    }
}

impl std::error::Error for LinalgError {}
