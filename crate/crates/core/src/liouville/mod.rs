//! Vectorised Lindblad dynamics.
//!
//! Density matrices are flattened row by row: `ρ[i, j]` lands at index
//! `i·N + j`. Under this convention `vec(AρB) = (A ⊗ Bᵀ) vec(ρ)`, which fixes
//! every superoperator assembly below.

mod spectrum;

pub use spectrum::{
    full_spectrum_oracle, non_normality, state_fidelity, steady_density, steady_state,
    LiouvilleSpectrum, SteadyState,
};

use num_complex::Complex64;
use thiserror::Error;

use crate::fock::{self, FockError, FockOperator, FockSpace, KerrCatParams};
use crate::numerics::{ComplexMatrix, ComplexVector, LinalgError, NumericSettings};

#[derive(Debug, Error)]
pub enum LiouvilleError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("{op}: expected dimension {expected}, got {got}")]
    Dimension {
        op: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("Hamiltonian is not Hermitian: ‖H − H†‖_F = {deviation:.3e}")]
    NotHermitian { deviation: f64 },
    #[error("dissipation rate must be non-negative, got {0}")]
    NegativeRate(f64),
    #[error("no eigenvalue within {tolerance:.3e} of zero (closest |λ| = {closest:.3e}); trace preservation is broken")]
    NoSteadyEigenvalue { closest: f64, tolerance: f64 },
    #[error("eigenvalue with Re(λ) = {max_re:.3e} exceeds stability bound {tolerance:.3e}")]
    Unstable { max_re: f64, tolerance: f64 },
    #[error("no decaying mode: largest non-steady Re(λ) = {max_re:.3e}")]
    NoDecayingMode { max_re: f64 },
    #[error("steady state has zero trace; cannot normalise")]
    TracelessSteadyState,
    #[error("steady state is not positive semidefinite: smallest eigenvalue {min_eig:.3e}")]
    NotPositive { min_eig: f64 },
}

/// A flattened `N×N` operator (`N²` entries).
#[derive(Clone, Debug, PartialEq)]
pub struct Superket {
    space: FockSpace,
    vec: ComplexVector,
}

impl Superket {
    pub fn new(space: FockSpace, vec: ComplexVector) -> Result<Self, LiouvilleError> {
        let n = space.n_levels();
        if vec.dim() != n * n {
            return Err(LiouvilleError::Dimension {
                op: "superket",
                expected: n * n,
                got: vec.dim(),
            });
        }
        Ok(Self { space, vec })
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn vec(&self) -> &ComplexVector {
        &self.vec
    }

    pub fn into_vec(self) -> ComplexVector {
        self.vec
    }

    pub fn norm(&self) -> f64 {
        self.vec.norm()
    }

    /// ⟨⟨self|other⟩⟩ = Tr(self† other).
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.vec.inner(&other.vec)
    }

    /// ⟨⟨I|ρ⟩⟩ = Tr ρ.
    pub fn trace(&self) -> Complex64 {
        let n = self.space.n_levels();
        (0..n).map(|i| self.vec[i * n + i]).sum()
    }

    pub fn normalized(&self) -> Option<Self> {
        self.vec.normalized().map(|vec| Self {
            space: self.space,
            vec,
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            space: self.space,
            vec: self.vec.scale(c),
        }
    }

    /// Vectorised `(ρ + ρ†)/2`.
    pub fn hermitized(&self) -> Self {
        let n = self.space.n_levels();
        let mut out = self.vec.clone();
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = 0.5 * (self.vec[i * n + j] + self.vec[j * n + i].conj());
            }
        }
        Self {
            space: self.space,
            vec: out,
        }
    }

    /// Removes the global phase so that `e^{iφ}H` with `H = H†` becomes `±H`.
    ///
    /// Eigenvectors come back with arbitrary phase; Hermitizing without this
    /// step could cancel the operator entirely.
    pub fn with_hermitian_phase(&self) -> Self {
        let n = self.space.n_levels();
        // Tr(ρρ) = e^{2iφ} Tr(H²) for ρ = e^{iφ}H.
        let tr_sq: Complex64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.vec[i * n + j] * self.vec[j * n + i])
            .sum();
        if tr_sq.norm() == 0.0 {
            return self.clone();
        }
        let phase = Complex64::from_polar(1.0, -0.5 * tr_sq.arg());
        self.scale(phase)
    }
}

/// `|I⟩⟩`, the vectorised identity.
pub fn identity_superket(space: FockSpace) -> Superket {
    vectorize(&ComplexMatrix::identity(space.n_levels())).expect("identity is square")
}

pub fn vectorize(m: &ComplexMatrix) -> Result<Superket, LiouvilleError> {
    if !m.is_square() {
        return Err(LiouvilleError::Dimension {
            op: "vectorize",
            expected: m.rows(),
            got: m.cols(),
        });
    }
    let space = FockSpace::new(m.rows())?;
    Ok(Superket {
        space,
        vec: ComplexVector::new(m.to_row_major())?,
    })
}

pub fn devectorize(s: &Superket) -> ComplexMatrix {
    let n = s.space.n_levels();
    ComplexMatrix::from_fn(n, n, |i, j| s.vec[i * n + j])
}

/// Linear map on superkets, stored as an `N²×N²` matrix.
#[derive(Clone, Debug)]
pub struct Superoperator {
    space: FockSpace,
    matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn new(space: FockSpace, matrix: ComplexMatrix) -> Result<Self, LiouvilleError> {
        let d = space.n_levels() * space.n_levels();
        if matrix.shape() != (d, d) {
            return Err(LiouvilleError::Dimension {
                op: "superoperator",
                expected: d,
                got: matrix.rows(),
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.frobenius_norm()
    }

    pub fn apply(&self, s: &Superket) -> Result<Superket, LiouvilleError> {
        Ok(Superket {
            space: self.space,
            vec: self.matrix.mul_vec(&s.vec)?,
        })
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self, LiouvilleError> {
        Ok(Self {
            space: self.space,
            matrix: self.matrix.try_add(&rhs.matrix)?,
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            space: self.space,
            matrix: self.matrix.scale_real(c),
        }
    }
}

/// `ρ ↦ −i[H, ρ]`.
pub fn hamiltonian_superop(
    h: &FockOperator,
    settings: &NumericSettings,
) -> Result<Superoperator, LiouvilleError> {
    let m = h.matrix();
    let deviation = m.hermitian_deviation();
    if deviation > settings.hermitian_tol * m.frobenius_norm() {
        return Err(LiouvilleError::NotHermitian { deviation });
    }
    let n = h.space().n_levels();
    let id = ComplexMatrix::identity(n);
    let comm = &m.kron(&id) - &id.kron(&m.transpose());
    Superoperator::new(h.space(), comm.scale(Complex64::new(0.0, -1.0)))
}

/// `ρ ↦ rate · (lρl† − ½{l†l, ρ})`.
pub fn dissipator_superop(l: &FockOperator, rate: f64) -> Result<Superoperator, LiouvilleError> {
    if !(rate >= 0.0) {
        return Err(LiouvilleError::NegativeRate(rate));
    }
    let n = l.space().n_levels();
    let m = l.matrix();
    let id = ComplexMatrix::identity(n);
    let ldl = &m.adjoint() * m;
    let jump = m.kron(&m.conj());
    let anti = &ldl.kron(&id) + &id.kron(&ldl.transpose());
    let d = &jump - &anti.scale_real(0.5);
    Superoperator::new(l.space(), d.scale_real(rate))
}

/// `−i[H, ρ] + κ D[a]ρ` for the driven Kerr resonator with single-photon loss.
pub fn kerr_cat_liouvillian(
    space: FockSpace,
    p: &KerrCatParams,
    settings: &NumericSettings,
) -> Result<Superoperator, LiouvilleError> {
    let h = fock::kerr_cat_hamiltonian(space, p)?;
    let unitary = hamiltonian_superop(&h, settings)?;
    let loss = dissipator_superop(&fock::destroy(space), p.kappa_1ph)?;
    unitary.try_add(&loss)
}

/// |⟨⟨a|b⟩⟩| / (‖a‖ ‖b‖).
pub fn superket_overlap(a: &Superket, b: &Superket) -> f64 {
    let denom = a.norm() * b.norm();
    if denom == 0.0 {
        0.0
    } else {
        a.inner(b).norm() / denom
    }
}
