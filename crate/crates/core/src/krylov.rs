//! Real-time Krylov subspace estimation of Liouvillian eigenvalues.
//!
//! A trace-free superket is propagated by a fixed step `τ`, the resulting
//! columns span the subspace, and a thresholded generalised eigenproblem over
//! that subspace yields Ritz approximations of the slowest decay rates.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::fock::FockSpace;
use crate::liouville::{
    full_spectrum_oracle, LiouvilleError, Superket, Superoperator,
};
use crate::numerics::{
    condition_number, eig_general, expm, svd, ComplexMatrix, ComplexVector, LinalgError,
    NumericSettings,
};

/// Columns whose norm falls below this are indistinguishable from zero.
pub const UNDERFLOW_NORM: f64 = 1e-300;

const WINDING_FRACTION: f64 = 0.9;

#[derive(Debug, Error)]
pub enum KrylovError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Liouville(#[from] LiouvilleError),
    #[error("invalid Krylov configuration: {field} {reason}")]
    InvalidConfig {
        field: &'static str,
        reason: String,
    },
    #[error("initial superket must have unit norm, got {norm}")]
    NotUnitNorm { norm: f64 },
    #[error("{op}: expected dimension {expected}, got {got}")]
    Dimension {
        op: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("evolved superket norm {norm:.3e} underflowed at column {column}; reduce tau·D (currently {total_time})")]
    Underflow {
        column: usize,
        norm: f64,
        total_time: f64,
    },
    #[error("every singular value of the overlap matrix is below the threshold")]
    AllSingular,
    #[error("transfer-matrix eigenvalue |μ| = {modulus} exceeds 1 + {tolerance}; nonphysical growth")]
    NonphysicalGrowth { modulus: f64, tolerance: f64 },
    #[error("no decaying Ritz value survived filtering")]
    NoDecayingRitz,
    #[error("Ritz index {index} out of range ({len} values)")]
    IndexOutOfRange { index: usize, len: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KrylovMethod {
    /// Eigenvalues of the whitened `K†LK`.
    ProjectedGenerator,
    /// Eigenvalues `μ` of the whitened one-step shift, mapped by `ln μ / τ`.
    TransferMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovConfig {
    pub dim_d: usize,
    pub tau: f64,
    /// Relative singular-value cutoff on the overlap matrix.
    pub threshold: f64,
    pub method: KrylovMethod,
}

impl KrylovConfig {
    pub const DEFAULT_THRESHOLD: f64 = 1e-12;

    pub fn new(dim_d: usize, tau: f64, threshold: f64, method: KrylovMethod) -> Result<Self, KrylovError> {
        let cfg = Self {
            dim_d,
            tau,
            threshold,
            method,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), KrylovError> {
        if self.dim_d < 2 {
            return Err(KrylovError::InvalidConfig {
                field: "dim_d",
                reason: format!("must be at least 2, got {}", self.dim_d),
            });
        }
        self.validate_step()
    }

    fn validate_step(&self) -> Result<(), KrylovError> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(KrylovError::InvalidConfig {
                field: "tau",
                reason: format!("must be positive and finite, got {}", self.tau),
            });
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(KrylovError::InvalidConfig {
                field: "threshold",
                reason: format!("must lie in (0, 1), got {}", self.threshold),
            });
        }
        Ok(())
    }
}

/// `e^{Lτ}`, computed once and reused for every column and repetition.
#[derive(Clone, Debug)]
pub struct Propagator {
    tau: f64,
    matrix: ComplexMatrix,
}

impl Propagator {
    pub fn new(l: &Superoperator, tau: f64) -> Result<Self, KrylovError> {
        Ok(Self {
            tau,
            matrix: expm(&l.matrix().scale_real(tau))?,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// Raw Krylov columns and the small matrices built from them.
#[derive(Clone, Debug)]
pub struct KrylovData {
    pub space: FockSpace,
    pub tau: f64,
    /// `N²×D`, column `k` is `P^k ρ₀`, unnormalised.
    pub basis: ComplexMatrix,
    /// `S_ij = ⟨⟨ρ_i|ρ_j⟩⟩`.
    pub overlap: ComplexMatrix,
    /// `L̄_ij = ⟨⟨ρ_i|L|ρ_j⟩⟩`.
    pub projected_generator: ComplexMatrix,
    /// `S′_ij = ⟨⟨ρ_i|ρ_{j+1}⟩⟩`.
    pub shifted_overlap: ComplexMatrix,
    pub column_norms: Vec<f64>,
}

impl KrylovData {
    pub fn dim_d(&self) -> usize {
        self.overlap.rows()
    }
}

pub fn build_basis(
    l: &Superoperator,
    rho0: &Superket,
    cfg: &KrylovConfig,
) -> Result<KrylovData, KrylovError> {
    cfg.validate_step()?;
    let prop = Propagator::new(l, cfg.tau)?;
    build_basis_with(l, &prop, rho0, cfg)
}

/// As [`build_basis`] with a precomputed propagator for `cfg.tau`.
pub fn build_basis_with(
    l: &Superoperator,
    prop: &Propagator,
    rho0: &Superket,
    cfg: &KrylovConfig,
) -> Result<KrylovData, KrylovError> {
    cfg.validate_step()?;
    if cfg.dim_d == 0 {
        return Err(KrylovError::InvalidConfig {
            field: "dim_d",
            reason: "must be positive".into(),
        });
    }
    if (prop.tau - cfg.tau).abs() > 0.0 {
        return Err(KrylovError::InvalidConfig {
            field: "tau",
            reason: format!("propagator built for {}, config asks for {}", prop.tau, cfg.tau),
        });
    }
    let dim = l.matrix().rows();
    if rho0.vec().dim() != dim {
        return Err(KrylovError::Dimension {
            op: "build_basis",
            expected: dim,
            got: rho0.vec().dim(),
        });
    }
    let norm0 = rho0.norm();
    if (norm0 - 1.0).abs() > 1e-10 {
        return Err(KrylovError::NotUnitNorm { norm: norm0 });
    }

    let d = cfg.dim_d;
    let mut columns = Vec::with_capacity(d + 1);
    columns.push(rho0.vec().clone());
    for k in 1..=d {
        let next = prop.matrix.mul_vec(&columns[k - 1])?;
        let norm = next.norm();
        if norm < UNDERFLOW_NORM {
            return Err(KrylovError::Underflow {
                column: k,
                norm,
                total_time: cfg.tau * d as f64,
            });
        }
        columns.push(next);
    }
    let column_norms = columns[..d].iter().map(ComplexVector::norm).collect();

    let basis = ComplexMatrix::from_columns(&columns[..d])?;
    let shifted = ComplexMatrix::from_columns(&columns[1..])?;
    let basis_adj = basis.adjoint();
    let overlap = basis_adj.matmul(&basis)?;
    let shifted_overlap = basis_adj.matmul(&shifted)?;
    let projected_generator = basis_adj.matmul(&l.matrix().matmul(&basis)?)?;

    Ok(KrylovData {
        space: rho0.space(),
        tau: cfg.tau,
        basis,
        overlap,
        projected_generator,
        shifted_overlap,
        column_norms,
    })
}

/// Every Ritz pair of the whitened problem, before any physical filtering.
#[derive(Clone, Debug)]
pub struct RitzSpectrum {
    pub values: Vec<Complex64>,
    /// Length-D weight vectors over the raw Krylov columns.
    pub weights: Vec<ComplexVector>,
    /// Transfer-matrix eigenvalues, when that method was used.
    pub multipliers: Option<Vec<Complex64>>,
    pub kept_rank: usize,
    pub cond_s: f64,
    pub winding_warning: bool,
}

pub fn ritz_spectrum(
    data: &KrylovData,
    cfg: &KrylovConfig,
    settings: &NumericSettings,
) -> Result<RitzSpectrum, KrylovError> {
    let d = data.dim_d();
    let s_dec = svd(&data.overlap)?;
    let sigma_max = s_dec.singular_values.first().copied().unwrap_or(0.0);
    let kept_rank = s_dec
        .singular_values
        .iter()
        .take_while(|&&s| sigma_max > 0.0 && s >= cfg.threshold * sigma_max)
        .count();
    if kept_rank == 0 {
        return Err(KrylovError::AllSingular);
    }
    let cond_s = condition_number(&data.overlap, settings)?;

    let u = &s_dec.left_vectors;
    let whiten = ComplexMatrix::from_fn(d, kept_rank, |i, j| {
        u[(i, j)] / s_dec.singular_values[j].sqrt()
    });
    let whiten_adj = whiten.adjoint();
    let small = match cfg.method {
        KrylovMethod::ProjectedGenerator => &data.projected_generator,
        KrylovMethod::TransferMatrix => &data.shifted_overlap,
    };
    let reduced = whiten_adj.matmul(&small.matmul(&whiten)?)?;
    let dec = eig_general(&reduced, settings)?;

    let weights: Vec<ComplexVector> = (0..kept_rank)
        .map(|j| whiten.mul_vec(&dec.right_eigenvectors.column(j)))
        .collect::<Result<_, _>>()?;

    let (values, multipliers) = match cfg.method {
        KrylovMethod::ProjectedGenerator => (dec.eigenvalues, None),
        KrylovMethod::TransferMatrix => {
            for mu in &dec.eigenvalues {
                if mu.norm() > 1.0 + settings.growth_tol {
                    return Err(KrylovError::NonphysicalGrowth {
                        modulus: mu.norm(),
                        tolerance: settings.growth_tol,
                    });
                }
            }
            let values = dec.eigenvalues.iter().map(|mu| mu.ln() / data.tau).collect();
            (values, Some(dec.eigenvalues))
        }
    };

    let winding_limit = WINDING_FRACTION * PI / data.tau;
    let winding_warning = cfg.method == KrylovMethod::TransferMatrix
        && values.iter().any(|z: &Complex64| z.im.abs() > winding_limit);
    if winding_warning {
        log::warn!(
            "Ritz frequency beyond {:.3e} = 0.9π/τ; transfer-matrix branch may have wound",
            winding_limit
        );
    }

    Ok(RitzSpectrum {
        values,
        weights,
        multipliers,
        kept_rank,
        cond_s,
        winding_warning,
    })
}

#[derive(Clone, Debug)]
pub struct GapEstimate {
    /// Physical Ritz values, sorted by descending real part.
    pub ritz_values: Vec<Complex64>,
    pub ritz_weights: Vec<ComplexVector>,
    pub gap: f64,
    pub kept_rank: usize,
    /// κ(S) of the full overlap matrix; infinite when numerically singular.
    pub cond_s: f64,
    /// Weights of the slow mode, `ritz_weights[0]`.
    pub filter_weights: ComplexVector,
    pub winding_warning: bool,
}

impl GapEstimate {
    pub fn slow_eigenvalue(&self) -> Complex64 {
        self.ritz_values[0]
    }
}

/// Ritz values near zero (steady-state leakage) and with positive real part
/// (numerical artefacts) are dropped before taking the gap.
pub fn solve_gevp(
    data: &KrylovData,
    cfg: &KrylovConfig,
    settings: &NumericSettings,
    generator_norm: f64,
) -> Result<GapEstimate, KrylovError> {
    let raw = ritz_spectrum(data, cfg, settings)?;
    let tol_ss = settings.steady_state_tol * generator_norm;
    let tol_re = settings.stability_tol * generator_norm;

    let mut kept: Vec<(Complex64, ComplexVector)> = raw
        .values
        .into_iter()
        .zip(raw.weights)
        .filter(|(z, _)| z.norm() > tol_ss && z.re <= tol_re)
        .collect();
    kept.sort_by(|a, b| {
        b.0.re
            .total_cmp(&a.0.re)
            .then_with(|| a.0.im.abs().total_cmp(&b.0.im.abs()))
            .then_with(|| a.0.im.total_cmp(&b.0.im))
    });
    let Some(first) = kept.first() else {
        return Err(KrylovError::NoDecayingRitz);
    };
    let gap = -first.0.re;
    if gap <= 0.0 {
        return Err(KrylovError::NoDecayingRitz);
    }
    let filter_weights = first.1.clone();
    let (ritz_values, ritz_weights) = kept.into_iter().unzip();
    Ok(GapEstimate {
        ritz_values,
        ritz_weights,
        gap,
        kept_rank: raw.kept_rank,
        cond_s: raw.cond_s,
        filter_weights,
        winding_warning: raw.winding_warning,
    })
}

/// Unit-norm superket `K·w` for Ritz pair `which`, phase-fixed so that
/// Hermitizing it does not cancel the operator.
pub fn reconstruct_eigenstate(
    data: &KrylovData,
    est: &GapEstimate,
    which: usize,
) -> Result<Superket, KrylovError> {
    let w = est
        .ritz_weights
        .get(which)
        .ok_or(KrylovError::IndexOutOfRange {
            index: which,
            len: est.ritz_weights.len(),
        })?;
    let v = data.basis.mul_vec(w)?;
    let ket = Superket::new(data.space, v)?.with_hermitian_phase();
    ket.normalized().ok_or(KrylovError::NoDecayingRitz)
}

/// `|Σ_k w_k e^{λτk}|²` at each eigenvalue.
pub fn filter_profile(weights: &ComplexVector, tau: f64, eigenvalues: &[Complex64]) -> Vec<f64> {
    eigenvalues
        .iter()
        .map(|&lambda| {
            let step = (lambda * tau).exp();
            let mut phase = Complex64::new(1.0, 0.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for w in weights.iter() {
                acc += w * phase;
                phase *= step;
            }
            acc.norm_sqr()
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct ConditioningRow {
    pub dim_d: usize,
    pub tau: f64,
    pub cond_s: f64,
    pub kept_rank: usize,
    /// Krylov gap, or the reason it could not be extracted.
    pub gap: Result<f64, String>,
    pub oracle_gap: f64,
    pub oracle_eigvec_condition: f64,
}

/// Krylov diagnostics across a grid of `(D, τ)`, next to the dense oracle.
pub fn conditioning_report(
    l: &Superoperator,
    rho0: &Superket,
    cfg_grid: &[KrylovConfig],
    settings: &NumericSettings,
) -> Result<Vec<ConditioningRow>, KrylovError> {
    if cfg_grid.is_empty() {
        return Err(KrylovError::InvalidConfig {
            field: "cfg_grid",
            reason: "must not be empty".into(),
        });
    }
    let oracle = full_spectrum_oracle(l, settings)?;
    let norm = l.frobenius_norm();
    let mut cached: Option<Propagator> = None;
    let mut rows = Vec::with_capacity(cfg_grid.len());
    for cfg in cfg_grid {
        cfg.validate()?;
        let prop = match cached.take() {
            Some(p) if p.tau == cfg.tau => p,
            _ => Propagator::new(l, cfg.tau)?,
        };
        let data = build_basis_with(l, &prop, rho0, cfg)?;
        cached = Some(prop);
        let cond_s = condition_number(&data.overlap, settings)?;
        let (kept_rank, gap) = match solve_gevp(&data, cfg, settings, norm) {
            Ok(est) => (est.kept_rank, Ok(est.gap)),
            Err(e) => (0, Err(e.to_string())),
        };
        rows.push(ConditioningRow {
            dim_d: cfg.dim_d,
            tau: cfg.tau,
            cond_s,
            kept_rank,
            gap,
            oracle_gap: oracle.gap,
            oracle_eigvec_condition: oracle.eigvec_condition,
        });
    }
    Ok(rows)
}
