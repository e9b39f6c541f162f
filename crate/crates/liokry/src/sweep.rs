//! Sweep orchestration: one Liouvillian per drive strength, evaluated in
//! parallel and collected in grid order.

use std::time::Instant;

use liokry_core::catmodel::{mean_field_alpha_sq, TraceZeroSampler};
use liokry_core::fock::{FockSpace, KerrCatParams};
use liokry_core::krylov::{build_basis_with, reconstruct_eigenstate, solve_gevp, Propagator};
use liokry_core::liouville::{
    devectorize, full_spectrum_oracle, kerr_cat_liouvillian, non_normality, steady_density,
    steady_state, Superoperator,
};
use liokry_core::numerics::{ComplexMatrix, NumericSettings};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, StateKind, StateSource};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointOutcome {
    Ok,
    /// Some quantities are NA.
    Partial,
    /// Neither gap could be computed.
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointStatus {
    pub outcome: PointOutcome,
    pub messages: Vec<String>,
}

/// One `(g, τ)` point. `None` is written as NA.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub g: f64,
    pub tau: f64,
    pub dim_d: usize,
    pub alpha_sq_mf: Option<f64>,
    pub gap_oracle: Option<f64>,
    /// Successful repetitions only, in sampling order.
    pub gap_krylov: Vec<f64>,
    /// Largest κ(S) over repetitions; infinite when S is numerically singular.
    pub cond_s: Option<f64>,
    /// Smallest kept rank over repetitions.
    pub kept_rank: Option<usize>,
    pub non_normality: Option<f64>,
    pub eigvec_cond: Option<f64>,
    pub wall_time_ms: f64,
    pub status: PointStatus,
}

impl SweepRow {
    pub fn gap_krylov_mean(&self) -> Option<f64> {
        if self.gap_krylov.is_empty() {
            None
        } else {
            Some(self.gap_krylov.iter().sum::<f64>() / self.gap_krylov.len() as f64)
        }
    }

    pub fn gap_krylov_min(&self) -> Option<f64> {
        self.gap_krylov.iter().copied().reduce(f64::min)
    }

    pub fn gap_krylov_max(&self) -> Option<f64> {
        self.gap_krylov.iter().copied().reduce(f64::max)
    }

    pub fn failed(&self) -> bool {
        self.status.outcome == PointOutcome::Failed
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SweepOptions {
    /// Worker threads; `None` uses every available core.
    pub workers: Option<usize>,
}

/// Evaluates every `(g, τ)` point. Rows come back ordered by g index, then
/// τ index, whatever the completion order.
pub fn run_sweep(cfg: &RunConfig, opts: SweepOptions) -> Vec<SweepRow> {
    let gs = cfg.g_sweep.values();
    let work = || -> Vec<Vec<SweepRow>> {
        gs.par_iter()
            .enumerate()
            .map(|(index, &g)| evaluate_point(cfg, index, g))
            .collect()
    };
    let nested = match build_pool(opts.workers) {
        Some(pool) => pool.install(work),
        None => work(),
    };
    nested.into_iter().flatten().collect()
}

fn build_pool(workers: Option<usize>) -> Option<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    match builder.build() {
        Ok(pool) => Some(pool),
        Err(e) => {
            log::warn!("could not build worker pool ({e}); running on the global pool");
            None
        }
    }
}

/// Sampler for grid point `index`: the base seed shifted by the index.
pub fn point_sampler(cfg: &RunConfig, index: usize) -> TraceZeroSampler {
    TraceZeroSampler::new(cfg.krylov.seed, cfg.krylov.n_pairs)
        .expect("n_pairs validated at parse time")
        .fork(index as u64)
}

fn evaluate_point(cfg: &RunConfig, index: usize, g: f64) -> Vec<SweepRow> {
    let settings = NumericSettings::default();
    let start = Instant::now();
    let params = cfg.params(g);
    let mut shared = Vec::new();

    let alpha_sq_mf = match mean_field_alpha_sq(&params) {
        Ok(a) => Some(a),
        Err(e) => {
            shared.push(format!("mean field: {e}"));
            None
        }
    };

    let l = FockSpace::new(cfg.n_levels)
        .map_err(|e| e.to_string())
        .and_then(|space| kerr_cat_liouvillian(space, &params, &settings).map_err(|e| e.to_string()));
    let l = match l {
        Ok(l) => l,
        Err(e) => {
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            return cfg
                .krylov
                .tau_list
                .iter()
                .map(|&tau| SweepRow {
                    g,
                    tau,
                    dim_d: cfg.krylov.dim_d,
                    alpha_sq_mf,
                    gap_oracle: None,
                    gap_krylov: Vec::new(),
                    cond_s: None,
                    kept_rank: None,
                    non_normality: None,
                    eigvec_cond: None,
                    wall_time_ms: elapsed,
                    status: PointStatus {
                        outcome: PointOutcome::Failed,
                        messages: vec![format!("liouvillian: {e}")],
                    },
                })
                .collect();
        }
    };
    let generator_norm = l.frobenius_norm();
    let nn = non_normality(&l);

    let (gap_oracle, eigvec_cond) = if cfg.oracle_enabled {
        match full_spectrum_oracle(&l, &settings) {
            Ok(spec) => (Some(spec.gap), finite_or_note(spec.eigvec_condition, "eigvec_cond", &mut shared)),
            Err(e) => {
                shared.push(format!("oracle: {e}"));
                (None, None)
            }
        }
    } else {
        (None, None)
    };
    let shared_ms = start.elapsed().as_secs_f64() * 1e3;
    log::debug!("g = {g}: shared work {shared_ms:.0} ms");

    let mut rows = Vec::with_capacity(cfg.krylov.tau_list.len());
    for &tau in &cfg.krylov.tau_list {
        let t0 = Instant::now();
        let mut messages = shared.clone();
        let krylov = krylov_repetitions(cfg, index, &params, &l, tau, generator_norm, &settings, &mut messages);

        let have_krylov = !krylov.gaps.is_empty();
        let outcome = if gap_oracle.is_none() && !have_krylov {
            PointOutcome::Failed
        } else if messages.is_empty() {
            PointOutcome::Ok
        } else {
            PointOutcome::Partial
        };
        rows.push(SweepRow {
            g,
            tau,
            dim_d: cfg.krylov.dim_d,
            alpha_sq_mf,
            gap_oracle,
            gap_krylov: krylov.gaps,
            cond_s: krylov.cond_s,
            kept_rank: krylov.kept_rank,
            non_normality: Some(nn),
            eigvec_cond,
            wall_time_ms: shared_ms + t0.elapsed().as_secs_f64() * 1e3,
            status: PointStatus { outcome, messages },
        });
    }
    rows
}

fn finite_or_note(x: f64, name: &str, notes: &mut Vec<String>) -> Option<f64> {
    if x.is_finite() {
        Some(x)
    } else {
        notes.push(format!("{name}: numerically singular"));
        None
    }
}

struct KrylovSummary {
    gaps: Vec<f64>,
    cond_s: Option<f64>,
    kept_rank: Option<usize>,
}

fn krylov_repetitions(
    cfg: &RunConfig,
    index: usize,
    params: &KerrCatParams,
    l: &Superoperator,
    tau: f64,
    generator_norm: f64,
    settings: &NumericSettings,
    messages: &mut Vec<String>,
) -> KrylovSummary {
    let empty = KrylovSummary {
        gaps: Vec::new(),
        cond_s: None,
        kept_rank: None,
    };
    let kcfg = cfg.krylov.krylov_config(tau);
    let prop = match Propagator::new(l, tau) {
        Ok(p) => p,
        Err(e) => {
            messages.push(format!("tau {tau:?}: propagator: {e}"));
            return empty;
        }
    };
    let mut sampler = point_sampler(cfg, index);
    let mut gaps = Vec::with_capacity(cfg.krylov.repetitions);
    let mut cond_s: Option<f64> = None;
    let mut kept_rank: Option<usize> = None;
    for rep in 0..cfg.krylov.repetitions {
        let result = sampler
            .sample(l.space(), params, settings)
            .map_err(|e| e.to_string())
            .and_then(|rho0| build_basis_with(l, &prop, &rho0, &kcfg).map_err(|e| e.to_string()))
            .and_then(|data| solve_gevp(&data, &kcfg, settings, generator_norm).map_err(|e| e.to_string()));
        match result {
            Ok(est) => {
                if est.winding_warning {
                    messages.push(format!("tau {tau:?} rep {rep}: Ritz value near the winding limit"));
                }
                gaps.push(est.gap);
                cond_s = Some(cond_s.map_or(est.cond_s, |c| c.max(est.cond_s)));
                kept_rank = Some(kept_rank.map_or(est.kept_rank, |k| k.min(est.kept_rank)));
            }
            Err(e) => messages.push(format!("tau {tau:?} rep {rep}: {e}")),
        }
    }
    if let Some(c) = cond_s {
        if !c.is_finite() {
            messages.push("cond_s: overlap matrix numerically singular".into());
        }
    }
    KrylovSummary {
        gaps,
        cond_s,
        kept_rank,
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct StateError(pub String);

/// Density-like operator for a Wigner request, Hermitized.
///
/// The Krylov slow mode uses the first sample of the grid-index-0 sampler and
/// the first τ of the config.
pub fn requested_state(
    cfg: &RunConfig,
    g: f64,
    state: StateKind,
    source: StateSource,
) -> Result<ComplexMatrix, StateError> {
    let settings = NumericSettings::default();
    let err = |ctx: &str, e: &dyn std::fmt::Display| StateError(format!("{ctx}: {e}"));
    let params = cfg.params(g);
    let space = FockSpace::new(cfg.n_levels).map_err(|e| err("fock space", &e))?;
    let l = kerr_cat_liouvillian(space, &params, &settings).map_err(|e| err("liouvillian", &e))?;
    match (state, source) {
        (StateKind::Steady, _) => {
            let ss = steady_state(&l, &settings).map_err(|e| err("steady state", &e))?;
            Ok(steady_density(&ss))
        }
        (StateKind::Slow, StateSource::Oracle) => {
            let spec = full_spectrum_oracle(&l, &settings).map_err(|e| err("oracle", &e))?;
            Ok(devectorize(&spec.slow_mode().hermitized()))
        }
        (StateKind::Slow, StateSource::Krylov) => {
            let tau = cfg.krylov.tau_list[0];
            let kcfg = cfg.krylov.krylov_config(tau);
            let mut sampler = point_sampler(cfg, 0);
            let rho0 = sampler
                .sample(space, &params, &settings)
                .map_err(|e| err("sampler", &e))?;
            let prop = Propagator::new(&l, tau).map_err(|e| err("propagator", &e))?;
            let data = build_basis_with(&l, &prop, &rho0, &kcfg).map_err(|e| err("krylov basis", &e))?;
            let est = solve_gevp(&data, &kcfg, &settings, l.frobenius_norm()).map_err(|e| err("krylov", &e))?;
            let ket = reconstruct_eigenstate(&data, &est, 0).map_err(|e| err("reconstruction", &e))?;
            Ok(devectorize(&ket.hermitized()))
        }
    }
}
