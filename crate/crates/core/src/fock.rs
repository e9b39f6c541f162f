//! Truncated single-mode bosonic operators and the two-photon-driven Kerr
//! Hamiltonian
//!
//! `H = δ a†a − K a†²a² + g (a†² + a²)`
//!
//! in the photon-number basis `|0⟩ … |N−1⟩`.

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::{ComplexMatrix, ComplexVector, LinalgError};

/// Tail weight above which a truncated coherent state is reported.
pub const TAIL_WARNING_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("Fock space needs at least 2 levels, got {0}")]
    TooFewLevels(usize),
    #[error("invalid Kerr-cat parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("odd cat state is undefined at alpha = 0")]
    DegenerateCat,
    #[error("logical operators need alpha > 0, got {0}")]
    NonPositiveAlpha(f64),
    #[error("operator is {got}x{got}, Fock space has {expected} levels")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FockSpace {
    n_levels: usize,
}

impl FockSpace {
    pub fn new(n_levels: usize) -> Result<Self, FockError> {
        if n_levels < 2 {
            return Err(FockError::TooFewLevels(n_levels));
        }
        Ok(Self { n_levels })
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    /// Number state `|n⟩`.
    pub fn number_state(&self, n: usize) -> ComplexVector {
        ComplexVector::basis(self.n_levels, n)
    }
}

/// An `N×N` operator tied to the space it acts on.
#[derive(Clone, Debug)]
pub struct FockOperator {
    space: FockSpace,
    matrix: ComplexMatrix,
}

impl FockOperator {
    pub fn new(space: FockSpace, matrix: ComplexMatrix) -> Result<Self, FockError> {
        let n = space.n_levels();
        if matrix.shape() != (n, n) {
            return Err(FockError::DimensionMismatch {
                expected: n,
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

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn apply(&self, v: &ComplexVector) -> Result<ComplexVector, FockError> {
        Ok(self.matrix.mul_vec(v)?)
    }

    pub fn compose(&self, rhs: &Self) -> Self {
        Self {
            space: self.space,
            matrix: &self.matrix * &rhs.matrix,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            space: self.space,
            matrix: self.matrix.scale_real(c),
        }
    }
}

/// Hamiltonian and loss parameters in units of the single-photon loss rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KerrCatParams {
    /// Detuning δ.
    pub delta: f64,
    /// Kerr nonlinearity K.
    pub kerr: f64,
    /// Two-photon drive g.
    pub drive: f64,
    /// Single-photon loss rate κ.
    pub kappa_1ph: f64,
}

impl KerrCatParams {
    /// κ = 1, δ = κ/5, K = κ/20 at drive `g`.
    pub fn reference(drive: f64) -> Self {
        Self {
            delta: 0.2,
            kerr: 0.05,
            drive,
            kappa_1ph: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), FockError> {
        let fields = [
            ("delta", self.delta),
            ("kerr", self.kerr),
            ("drive", self.drive),
            ("kappa_1ph", self.kappa_1ph),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(FockError::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
        }
        if self.kerr <= 0.0 {
            return Err(FockError::InvalidParameter {
                name: "kerr",
                value: self.kerr,
                reason: "must be positive",
            });
        }
        if self.kappa_1ph < 0.0 {
            return Err(FockError::InvalidParameter {
                name: "kappa_1ph",
                value: self.kappa_1ph,
                reason: "must be non-negative",
            });
        }
        Ok(())
    }

    /// Cat amplitude √(g/K) of the undamped, resonant problem.
    pub fn cat_amplitude(&self) -> f64 {
        (self.drive / self.kerr).max(0.0).sqrt()
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Annihilation operator, `⟨n−1|a|n⟩ = √n`.
pub fn destroy(space: FockSpace) -> FockOperator {
    let n = space.n_levels();
    let matrix = ComplexMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            real((j as f64).sqrt())
        } else {
            real(0.0)
        }
    });
    FockOperator { space, matrix }
}

pub fn create(space: FockSpace) -> FockOperator {
    destroy(space).adjoint()
}

pub fn number(space: FockSpace) -> FockOperator {
    let diag: Vec<f64> = (0..space.n_levels()).map(|k| k as f64).collect();
    FockOperator {
        space,
        matrix: ComplexMatrix::from_real_diagonal(&diag),
    }
}

pub fn identity(space: FockSpace) -> FockOperator {
    FockOperator {
        space,
        matrix: ComplexMatrix::identity(space.n_levels()),
    }
}

/// Photon-number parity `(−1)^n`.
pub fn parity(space: FockSpace) -> FockOperator {
    let diag: Vec<f64> = (0..space.n_levels())
        .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    FockOperator {
        space,
        matrix: ComplexMatrix::from_real_diagonal(&diag),
    }
}

pub fn kerr_cat_hamiltonian(space: FockSpace, p: &KerrCatParams) -> Result<FockOperator, FockError> {
    p.validate()?;
    let a = destroy(space);
    let ad = a.adjoint();
    let a2 = a.compose(&a);
    let ad2 = ad.compose(&ad);
    let n_op = ad.compose(&a);
    let kerr_term = ad2.compose(&a2);

    let h = &(&n_op.matrix.scale_real(p.delta) - &kerr_term.matrix.scale_real(p.kerr))
        + &(&ad2.matrix + &a2.matrix).scale_real(p.drive);
    FockOperator::new(space, h)
}

/// Resonant Hamiltonian in the factorised form
/// `−K (a†² − g/K)(a² − g/K) + g²/K`.
///
/// Agrees with [`kerr_cat_hamiltonian`] at δ = 0 away from the truncation edge.
pub fn kerr_cat_hamiltonian_factorised(
    space: FockSpace,
    p: &KerrCatParams,
) -> Result<FockOperator, FockError> {
    p.validate()?;
    let n = space.n_levels();
    let a = destroy(space);
    let a2 = a.compose(&a).matrix;
    let ad2 = a2.adjoint();
    let shift = ComplexMatrix::identity(n).scale_real(p.drive / p.kerr);
    let left = &ad2 - &shift;
    let right = &a2 - &shift;
    let h = &(&left * &right).scale_real(-p.kerr)
        + &ComplexMatrix::identity(n).scale_real(p.drive * p.drive / p.kerr);
    FockOperator::new(space, h)
}

/// Probability weight a coherent state places on `|n⟩` for `n ≥ N`.
pub fn coherent_tail_weight(space: FockSpace, alpha: Complex64) -> f64 {
    let x = alpha.norm_sqr();
    let n = space.n_levels();
    if x == 0.0 {
        return 0.0;
    }
    // Sum the Poisson tail directly so that small tails keep full precision.
    let ln_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    let mut term = (-x + n as f64 * x.ln() - ln_fact).exp();
    let mut total = 0.0;
    let mut k = n;
    while term > 0.0 && term > 1e-17 * total {
        total += term;
        k += 1;
        term *= x / k as f64;
        if k > n + 10_000 {
            break;
        }
    }
    total.min(1.0)
}

fn unnormalized_coherent(space: FockSpace, alpha: Complex64) -> ComplexVector {
    let mut amp = ComplexVector::zeros(space.n_levels());
    let mut c = real(1.0);
    for k in 0..space.n_levels() {
        if k > 0 {
            c = c * alpha / (k as f64).sqrt();
        }
        amp[k] = c;
    }
    amp
}

/// Coherent state `|α⟩`, truncated and renormalised to unit norm.
///
/// Logs a warning when the discarded tail exceeds [`TAIL_WARNING_THRESHOLD`].
pub fn coherent_state(space: FockSpace, alpha: Complex64) -> ComplexVector {
    let tail = coherent_tail_weight(space, alpha);
    if tail > TAIL_WARNING_THRESHOLD {
        log::warn!(
            "coherent state |α|² = {:.3} loses weight {tail:.2e} beyond N = {}",
            alpha.norm_sqr(),
            space.n_levels()
        );
    }
    unnormalized_coherent(space, alpha)
        .normalized()
        .expect("vacuum amplitude is nonzero")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CatParity {
    Even,
    Odd,
}

impl CatParity {
    pub fn sign(self) -> f64 {
        match self {
            Self::Even => 1.0,
            Self::Odd => -1.0,
        }
    }
}

/// `|C±⟩ ∝ |α⟩ ± |−α⟩`, normalised.
pub fn cat_state(
    space: FockSpace,
    alpha: Complex64,
    parity: CatParity,
) -> Result<ComplexVector, FockError> {
    if parity == CatParity::Odd && alpha.norm() == 0.0 {
        return Err(FockError::DegenerateCat);
    }
    let plus = coherent_state(space, alpha);
    let minus = coherent_state(space, -alpha);
    let mut sum = plus;
    sum.axpy(real(parity.sign()), &minus);
    // Entries of the wrong parity cancel up to rounding; zero them exactly.
    let keep = match parity {
        CatParity::Even => 0,
        CatParity::Odd => 1,
    };
    for k in 0..sum.dim() {
        if k % 2 != keep {
            sum[k] = real(0.0);
        }
    }
    sum.normalized().ok_or(FockError::DegenerateCat)
}

/// Cat-qubit logical operators `(Z̄, X̄) = (a/α, Π)`.
pub fn logical_operators(
    space: FockSpace,
    alpha: f64,
) -> Result<(FockOperator, FockOperator), FockError> {
    if !(alpha > 0.0) {
        return Err(FockError::NonPositiveAlpha(alpha));
    }
    Ok((destroy(space).scale(1.0 / alpha), parity(space)))
}
