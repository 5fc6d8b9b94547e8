//! Dense real linear algebra kernels sized for the lab: multiplication,
//! pivoted LU solves, a cyclic Jacobi symmetric eigensolver, real Schur
//! eigenvalue extraction for general matrices, norms, and commutators.
//!
//! Everything here is a pure function of its inputs and safe to call from
//! any number of threads.

mod jacobi;
mod lu;
mod matrix;
mod qr;
mod schur;

pub use jacobi::{eig_symmetric, rayleigh_max, EigenSym, SYMMETRY_REL_TOL};
pub use lu::{lu_solve, PIVOT_REL_THRESHOLD};
pub use matrix::Matrix;
pub use qr::qr;
pub use schur::{real_eigenvalues, schur_blocks, RealSpectrum, SchurBlock};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {left}×{left} vs {right}×{right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("invalid matrix data: expected {expected} entries, got {got}")]
    InvalidData { expected: usize, got: usize },
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("matrix is not symmetric (‖m−mᵀ‖_F = {residual:.3e})")]
    NotSymmetric { residual: f64 },
    #[error("singular matrix: pivot {pivot:.3e} below threshold {threshold:.3e}")]
    Singular { pivot: f64, threshold: f64 },
    #[error("no convergence: {what}")]
    NoConvergence { what: &'static str },
}

/// Lie bracket `[a, b] = a·b − b·a`.
pub fn commutator(a: &Matrix, b: &Matrix) -> Result<Matrix, LinalgError> {
    a.matmul(b)?.sub(&b.matmul(a)?)
}

/// Frobenius and spectral (operator 2-) norms of a matrix.
///
/// The spectral norm is `sqrt(λ_max(mᵀm))`; the Gram matrix is exactly
/// symmetric by construction so the Jacobi solver always applies.
pub fn norms(m: &Matrix) -> (f64, f64) {
    let frobenius = m.frobenius_norm();
    if frobenius == 0.0 {
        return (0.0, 0.0);
    }
    let gram = m
        .transpose()
        .matmul(m)
        .expect("square matrices share dimension");
    let eig = eig_symmetric(&gram).expect("Jacobi converges on a Gram matrix");
    (frobenius, eig.values[0].max(0.0).sqrt())
}

/// Euclidean norm of a vector.
pub fn vec_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
