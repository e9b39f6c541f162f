//! Configuration, sweep orchestration and artifact emission for the
//! `liokry` command-line tool.

pub mod config;
pub mod output;
pub mod sweep;

use std::path::PathBuf;
use std::time::Instant;

use liokry_core::numerics::NumericSettings;
use liokry_core::wigner::{wigner_of, WignerMap};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig, StateKind, StateSource};
use crate::output::{emit_outputs, OutputError, WignerOutcome};
use crate::sweep::{requested_state, run_sweep, SweepOptions, SweepRow};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("every sweep point failed; see {manifest}")]
    AllPointsFailed { manifest: PathBuf },
    #[error("{0}")]
    Runtime(String),
}

impl RunError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(ConfigError::Read { .. }) => 3,
            RunError::Config(_) => 1,
            RunError::AllPointsFailed { .. } | RunError::Runtime(_) => 2,
            RunError::Output(_) => 3,
        }
    }
}

pub struct RunSummary {
    pub rows: Vec<SweepRow>,
    pub files: Vec<PathBuf>,
}

/// Wigner map of a requested state on the configured grid.
pub fn wigner_map(cfg: &RunConfig, g: f64, state: StateKind, source: StateSource) -> Result<WignerMap, String> {
    let rho = requested_state(cfg, g, state, source).map_err(|e| e.to_string())?;
    let map = wigner_of(&rho, &cfg.outputs.wigner_grid.grid(), &NumericSettings::default())
        .map_err(|e| e.to_string())?;
    if map.coverage_warning {
        log::warn!("g = {g}: state support extends beyond the Wigner grid");
    }
    Ok(map)
}

/// Sweep, Wigner requests and artifact emission.
pub fn run(cfg: &RunConfig, opts: SweepOptions) -> Result<RunSummary, RunError> {
    let start = Instant::now();
    let rows = run_sweep(cfg, opts);
    let wigner: Vec<WignerOutcome> = cfg
        .wigner_requests
        .iter()
        .map(|req| {
            let map = wigner_map(cfg, req.g, req.state, req.source);
            if let Err(e) = &map {
                log::warn!("wigner request at g = {}: {e}", req.g);
            }
            WignerOutcome {
                request: req.clone(),
                map,
            }
        })
        .collect();
    let total = start.elapsed().as_secs_f64() * 1e3;
    let files = emit_outputs(&rows, &wigner, cfg, total)?;
    if !rows.is_empty() && rows.iter().all(SweepRow::failed) {
        return Err(RunError::AllPointsFailed {
            manifest: cfg.outputs.directory.join(output::MANIFEST),
        });
    }
    Ok(RunSummary { rows, files })
}
