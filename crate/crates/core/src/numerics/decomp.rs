use faer::Side;
use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError, NumericSettings};

/// Eigenvalues with right (and optionally left) eigenvectors stored as columns.
///
/// Right eigenvectors have unit 2-norm. When present, left eigenvectors are
/// scaled so that `⟨lᵢ|rᵢ⟩ = 1`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<Complex64>,
    pub right_eigenvectors: ComplexMatrix,
    pub left_eigenvectors: Option<ComplexMatrix>,
}

/// Real ascending spectrum with orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

/// `A = U Σ V†` with singular values in descending order.
#[derive(Clone, Debug)]
pub struct SvdDecomposition {
    pub singular_values: Vec<f64>,
    pub left_vectors: ComplexMatrix,
    pub right_vectors: ComplexMatrix,
}

fn require_square(a: &ComplexMatrix, op: &'static str) -> Result<(), LinalgError> {
    if a.is_square() {
        Ok(())
    } else {
        Err(LinalgError::NotSquare {
            op,
            rows: a.rows(),
            cols: a.cols(),
        })
    }
}

fn require_finite(a: &ComplexMatrix) -> Result<(), LinalgError> {
    if a.is_finite() {
        Ok(())
    } else {
        Err(LinalgError::NonFinite)
    }
}

fn raw_eigen(a: &ComplexMatrix) -> Result<(Vec<Complex64>, ComplexMatrix), LinalgError> {
    let n = a.rows();
    let evd = a.as_faer().eigen().map_err(|_| LinalgError::NoConvergence {
        routine: "eigen",
        dim: n,
    })?;
    let values: Vec<Complex64> = evd.S().column_vector().iter().copied().collect();
    let mut vectors = ComplexMatrix::from_faer(evd.U().to_owned());
    for j in 0..n {
        let norm = (0..n).map(|i| vectors[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for i in 0..n {
                vectors[(i, j)] /= norm;
            }
        }
    }
    Ok((values, vectors))
}

fn check_residuals(
    a: &ComplexMatrix,
    values: &[Complex64],
    vectors: &ComplexMatrix,
    settings: &NumericSettings,
) -> Result<(), LinalgError> {
    let bound = settings.eig_residual_tol * a.frobenius_norm();
    let av = a.matmul(vectors)?;
    for (j, &lambda) in values.iter().enumerate() {
        let mut res = 0.0;
        let mut vnorm = 0.0;
        for i in 0..a.rows() {
            res += (av[(i, j)] - lambda * vectors[(i, j)]).norm_sqr();
            vnorm += vectors[(i, j)].norm_sqr();
        }
        let (res, vnorm) = (res.sqrt(), vnorm.sqrt());
        if res > bound * vnorm {
            return Err(LinalgError::Residual {
                index: j,
                residual: res,
                bound: bound * vnorm,
            });
        }
    }
    Ok(())
}

/// Full spectrum of a general (non-Hermitian) square matrix with unit-norm
/// right eigenvectors. Every pair is checked against the residual contract.
pub fn eig_general(
    a: &ComplexMatrix,
    settings: &NumericSettings,
) -> Result<EigenDecomposition, LinalgError> {
    require_square(a, "eig_general")?;
    require_finite(a)?;
    let (eigenvalues, right) = raw_eigen(a)?;
    check_residuals(a, &eigenvalues, &right, settings)?;
    Ok(EigenDecomposition {
        eigenvalues,
        right_eigenvectors: right,
        left_eigenvectors: None,
    })
}

/// Like [`eig_general`], additionally computing left eigenvectors from an
/// independent decomposition of `A†`.
///
/// Left vectors are paired with right vectors by nearest eigenvalue
/// (`μ̄ⱼ ≈ λᵢ`) and rescaled to unit pairing. Pairing is only meaningful away
/// from degenerate eigenvalues.
pub fn eig_general_biorthogonal(
    a: &ComplexMatrix,
    settings: &NumericSettings,
) -> Result<EigenDecomposition, LinalgError> {
    let mut dec = eig_general(a, settings)?;
    let adj = a.adjoint();
    let (adj_values, adj_vectors) = raw_eigen(&adj)?;
    check_residuals(&adj, &adj_values, &adj_vectors, settings)?;

    let n = a.rows();
    let mut used = vec![false; n];
    let mut left = ComplexMatrix::zeros(n, n);
    for (i, &lambda) in dec.eigenvalues.iter().enumerate() {
        let j = (0..n)
            .filter(|&j| !used[j])
            .min_by(|&p, &q| {
                let dp = (adj_values[p].conj() - lambda).norm();
                let dq = (adj_values[q].conj() - lambda).norm();
                dp.total_cmp(&dq)
            })
            .expect("as many adjoint eigenvalues as eigenvalues");
        used[j] = true;
        let pairing: Complex64 = (0..n)
            .map(|k| adj_vectors[(k, j)].conj() * dec.right_eigenvectors[(k, i)])
            .sum();
        // l ← l / conj(pairing) so that ⟨l|r⟩ = 1.
        let scale = if pairing.norm() > 0.0 {
            1.0 / pairing.conj()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for k in 0..n {
            left[(k, i)] = adj_vectors[(k, j)] * scale;
        }
    }
    dec.left_eigenvectors = Some(left);
    Ok(dec)
}

/// Spectrum of a Hermitian matrix, ascending, with orthonormal eigenvectors.
pub fn eig_hermitian(
    a: &ComplexMatrix,
    settings: &NumericSettings,
) -> Result<HermitianEigen, LinalgError> {
    require_square(a, "eig_hermitian")?;
    require_finite(a)?;
    let deviation = a.hermitian_deviation();
    let tolerance = settings.hermitian_tol * a.frobenius_norm();
    if deviation > tolerance {
        return Err(LinalgError::NotHermitian {
            deviation,
            tolerance,
        });
    }
    let n = a.rows();
    let evd = a
        .as_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| LinalgError::NoConvergence {
            routine: "self_adjoint_eigen",
            dim: n,
        })?;
    let eigenvalues = evd.S().column_vector().iter().map(|z| z.re).collect();
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors: ComplexMatrix::from_faer(evd.U().to_owned()),
    })
}

/// Full singular value decomposition.
pub fn svd(a: &ComplexMatrix) -> Result<SvdDecomposition, LinalgError> {
    require_finite(a)?;
    let dec = a.as_faer().svd().map_err(|_| LinalgError::NoConvergence {
        routine: "svd",
        dim: a.rows().max(a.cols()),
    })?;
    Ok(SvdDecomposition {
        singular_values: dec.S().column_vector().iter().map(|z| z.re).collect(),
        left_vectors: ComplexMatrix::from_faer(dec.U().to_owned()),
        right_vectors: ComplexMatrix::from_faer(dec.V().to_owned()),
    })
}

/// σ_max / σ_min in the 2-norm. Numerically zero σ_min yields `f64::INFINITY`.
pub fn condition_number(a: &ComplexMatrix, settings: &NumericSettings) -> Result<f64, LinalgError> {
    let dec = svd(a)?;
    let sv = &dec.singular_values;
    let (Some(&smax), Some(&smin)) = (sv.first(), sv.last()) else {
        return Ok(f64::INFINITY);
    };
    let floor = settings.singular_floor * smax * (a.rows().max(a.cols()) as f64) * f64::EPSILON;
    if smin <= floor || smin == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(smax / smin)
    }
}
