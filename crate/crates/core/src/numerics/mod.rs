//! Dense complex linear algebra.
//!
//! Every routine here is a pure function of its inputs. Tolerances live in a
//! single [`NumericSettings`] record that callers thread through; the defaults
//! are the contract values the rest of the crate is tested against.
//! Decompositions are delegated to `faer`, the matrix exponential is
//! implemented locally.

mod decomp;
mod expm;
mod matrix;

pub use decomp::{
    condition_number, eig_general, eig_general_biorthogonal, eig_hermitian, svd,
    EigenDecomposition, HermitianEigen, SvdDecomposition,
};
pub use expm::expm;
pub use matrix::{ComplexMatrix, ComplexVector};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("expected {expected} entries, got {got}")]
    EntryCount { expected: usize, got: usize },
    #[error("non-finite entry in input")]
    NonFinite,
    #[error("{op}: matrix must be square, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("{op}: incompatible shapes {left:?} and {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{routine} did not converge on a {dim}x{dim} input within the backend iteration limit")]
    NoConvergence { routine: &'static str, dim: usize },
    #[error("eigenpair {index} residual {residual:.3e} exceeds bound {bound:.3e}")]
    Residual {
        index: usize,
        residual: f64,
        bound: f64,
    },
    #[error("matrix is not Hermitian: ‖A − A†‖_F = {deviation:.3e} > {tolerance:.3e}")]
    NotHermitian { deviation: f64, tolerance: f64 },
    #[error("matrix exponential overflows: ‖A‖₁ = {norm:.3e}")]
    ExpmOverflow { norm: f64 },
}

/// Tolerances shared by every numerics call.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericSettings {
    /// Relative bound on ‖Av − λv‖ / (‖A‖_F ‖v‖) for general eigenpairs.
    pub eig_residual_tol: f64,
    /// Relative bound on ‖A − A†‖_F accepted as Hermitian.
    pub hermitian_tol: f64,
    /// Singular values at or below `singular_floor · σ_max · max(rows, cols) · ε`
    /// count as exact zeros in condition numbers.
    pub singular_floor: f64,
    /// Null-eigenvalue tolerance relative to ‖L‖_F.
    pub steady_state_tol: f64,
    /// Largest admissible Re(λ) of a Liouvillian, relative to ‖L‖_F.
    pub stability_tol: f64,
    /// Smallest admissible eigenvalue of a state that should be PSD.
    pub psd_floor: f64,
    /// Transfer-matrix eigenvalues with |μ| > 1 + growth_tol are nonphysical.
    pub growth_tol: f64,
}

impl Default for NumericSettings {
    fn default() -> Self {
        Self {
            eig_residual_tol: 1e-10,
            hermitian_tol: 1e-12,
            singular_floor: 1.0,
            steady_state_tol: 1e-9,
            stability_tol: 1e-10,
            psd_floor: 1e-10,
            growth_tol: 1e-6,
        }
    }
}
