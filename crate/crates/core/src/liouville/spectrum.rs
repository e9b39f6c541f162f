use std::cmp::Ordering;

use num_complex::Complex64;

use super::{devectorize, LiouvilleError, Superket, Superoperator};
use crate::numerics::{
    condition_number, eig_general, eig_hermitian, svd, ComplexMatrix, NumericSettings,
};

/// Dense reference spectrum of a Liouvillian.
#[derive(Clone, Debug)]
pub struct LiouvilleSpectrum {
    /// Sorted by descending real part, ties by ascending |Im|.
    pub eigenvalues: Vec<Complex64>,
    /// Unit-norm right eigenvectors, columns aligned with `eigenvalues`.
    pub right_superkets: ComplexMatrix,
    pub steady_state_index: usize,
    pub slow_mode_index: usize,
    /// −Re(λ_slow), in units of the loss rate.
    pub gap: f64,
    /// κ(V) of the right-eigenvector matrix.
    pub eigvec_condition: f64,
    space: crate::fock::FockSpace,
}

impl LiouvilleSpectrum {
    pub fn steady_eigenvalue(&self) -> Complex64 {
        self.eigenvalues[self.steady_state_index]
    }

    pub fn slow_eigenvalue(&self) -> Complex64 {
        self.eigenvalues[self.slow_mode_index]
    }

    pub fn superket(&self, index: usize) -> Superket {
        Superket {
            space: self.space,
            vec: self.right_superkets.column(index),
        }
    }

    /// Slow-mode eigenoperator with its global phase chosen Hermitian.
    pub fn slow_mode(&self) -> Superket {
        self.superket(self.slow_mode_index).with_hermitian_phase()
    }
}

fn order_eigenvalues(a: &Complex64, b: &Complex64) -> Ordering {
    b.re.total_cmp(&a.re)
        .then_with(|| a.im.abs().total_cmp(&b.im.abs()))
        .then_with(|| a.im.total_cmp(&b.im))
}

/// Exact spectrum, steady state and gap by dense eigendecomposition.
///
/// Fails when no eigenvalue lies within the null tolerance (trace
/// preservation broken), when any eigenvalue grows, or when no decaying mode
/// exists besides the steady state (purely Hamiltonian dynamics).
pub fn full_spectrum_oracle(
    l: &Superoperator,
    settings: &NumericSettings,
) -> Result<LiouvilleSpectrum, LiouvilleError> {
    let norm = l.frobenius_norm();
    let tol_ss = settings.steady_state_tol * norm;
    let tol_re = settings.stability_tol * norm;

    let dec = eig_general(l.matrix(), settings)?;
    let dim = dec.eigenvalues.len();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| order_eigenvalues(&dec.eigenvalues[i], &dec.eigenvalues[j]));
    let eigenvalues: Vec<Complex64> = order.iter().map(|&i| dec.eigenvalues[i]).collect();
    let right = ComplexMatrix::from_fn(dim, dim, |r, c| dec.right_eigenvectors[(r, order[c])]);

    let max_re = eigenvalues[0].re;
    if max_re > tol_re {
        return Err(LiouvilleError::Unstable {
            max_re,
            tolerance: tol_re,
        });
    }

    let (steady_state_index, closest) = eigenvalues
        .iter()
        .enumerate()
        .map(|(i, z)| (i, z.norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty spectrum");
    if closest > tol_ss {
        return Err(LiouvilleError::NoSteadyEigenvalue {
            closest,
            tolerance: tol_ss,
        });
    }

    let slow_re = eigenvalues
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != steady_state_index)
        .map(|(_, z)| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if -slow_re <= tol_ss {
        return Err(LiouvilleError::NoDecayingMode { max_re: slow_re });
    }
    // Ties on Re(λ) go to the eigenvalue with the smallest |Im(λ)|.
    let slow_mode_index = eigenvalues
        .iter()
        .enumerate()
        .filter(|&(i, z)| i != steady_state_index && (z.re - slow_re).abs() <= tol_ss)
        .min_by(|a, b| a.1.im.abs().total_cmp(&b.1.im.abs()))
        .map(|(i, _)| i)
        .expect("slow candidate exists");

    let eigvec_condition = condition_number(&right, settings)?;
    Ok(LiouvilleSpectrum {
        gap: -eigenvalues[slow_mode_index].re,
        eigenvalues,
        right_superkets: right,
        steady_state_index,
        slow_mode_index,
        eigvec_condition,
        space: l.space(),
    })
}

/// ‖L†L − LL†‖_F / ‖L‖_F.
pub fn non_normality(l: &Superoperator) -> f64 {
    let m = l.matrix();
    let norm = m.frobenius_norm();
    if norm == 0.0 {
        return 0.0;
    }
    let adj = m.adjoint();
    (&(&adj * m) - &(m * &adj)).frobenius_norm() / norm
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    /// Trace-one, Hermitized steady state.
    pub superket: Superket,
    /// Second-smallest singular value of L; near zero signals a degenerate
    /// null space.
    pub secondary_singular_value: f64,
    pub degenerate: bool,
}

/// Null vector of L normalised to unit trace.
///
/// A numerically multidimensional null space is not an error: it is logged
/// and flagged on the result.
pub fn steady_state(
    l: &Superoperator,
    settings: &NumericSettings,
) -> Result<SteadyState, LiouvilleError> {
    let dec = svd(l.matrix())?;
    let dim = dec.singular_values.len();
    let null = dec.right_vectors.column(dim - 1);
    let secondary = dec.singular_values[dim - 2];
    let degenerate = secondary <= settings.steady_state_tol * l.frobenius_norm();
    if degenerate {
        log::warn!("steady state null space looks degenerate: secondary singular value {secondary:.3e}");
    }

    let raw = Superket {
        space: l.space(),
        vec: null,
    };
    let trace = raw.trace();
    if trace.norm() <= f64::EPSILON * raw.norm() {
        return Err(LiouvilleError::TracelessSteadyState);
    }
    let rho = raw.scale(1.0 / trace).hermitized();

    let min_eig = eig_hermitian(&devectorize(&rho), settings)?
        .eigenvalues
        .first()
        .copied()
        .unwrap_or(0.0);
    if min_eig < -settings.psd_floor {
        return Err(LiouvilleError::NotPositive { min_eig });
    }
    Ok(SteadyState {
        superket: rho,
        secondary_singular_value: secondary,
        degenerate,
    })
}

// Rounding-level eigenvalues would otherwise contribute O(√ε) each.
fn clipped_roots(eigenvalues: &[f64]) -> Vec<f64> {
    let top = eigenvalues.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let floor = top * eigenvalues.len() as f64 * f64::EPSILON;
    eigenvalues
        .iter()
        .map(|&x| if x <= floor { 0.0 } else { x.sqrt() })
        .collect()
}

fn psd_sqrt(m: &ComplexMatrix, settings: &NumericSettings) -> Result<ComplexMatrix, LiouvilleError> {
    let herm = (m + &m.adjoint()).scale_real(0.5);
    let dec = eig_hermitian(&herm, settings)?;
    let roots = clipped_roots(&dec.eigenvalues);
    let v = &dec.eigenvectors;
    Ok(&(v * &ComplexMatrix::from_real_diagonal(&roots)) * &v.adjoint())
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²` between two density matrices.
pub fn state_fidelity(
    rho: &ComplexMatrix,
    sigma: &ComplexMatrix,
    settings: &NumericSettings,
) -> Result<f64, LiouvilleError> {
    let sr = psd_sqrt(rho, settings)?;
    let inner = &(&sr * sigma) * &sr;
    let inner = (&inner + &inner.adjoint()).scale_real(0.5);
    let ev = eig_hermitian(&inner, settings)?.eigenvalues;
    let tr: f64 = clipped_roots(&ev).iter().sum();
    Ok(tr * tr)
}

/// Steady state of a trace-preserving map expressed as a density matrix.
pub fn steady_density(s: &SteadyState) -> ComplexMatrix {
    devectorize(&s.superket)
}
