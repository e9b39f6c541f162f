//! Artifact emission: sweep CSV, Wigner CSVs and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use liokry_core::wigner::WignerMap;
use serde::Serialize;
use thiserror::Error;

use crate::config::{OutputFormat, RunConfig, StateKind, StateSource, WignerRequest};
use crate::sweep::{PointStatus, SweepRow};

pub const SWEEP_HEADER: [&str; 13] = [
    "g",
    "alpha_sq_mf",
    "gap_oracle",
    "gap_krylov_mean",
    "gap_krylov_min",
    "gap_krylov_max",
    "cond_s",
    "kept_rank",
    "non_normality",
    "eigvec_cond",
    "tau",
    "D",
    "wall_time_ms",
];
pub const NA: &str = "NA";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const SWEEP_JSON: &str = "sweep.json";
pub const MANIFEST: &str = "manifest.json";
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Shortest round-trip representation (exponent form for very large or
/// small magnitudes); non-finite values become NA.
pub fn format_value(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{v:?}"),
        _ => NA.to_string(),
    }
}

/// The thirteen CSV cells of a row.
pub fn sweep_record(row: &SweepRow, record_wall_time: bool) -> Vec<String> {
    vec![
        format_value(Some(row.g)),
        format_value(row.alpha_sq_mf),
        format_value(row.gap_oracle),
        format_value(row.gap_krylov_mean()),
        format_value(row.gap_krylov_min()),
        format_value(row.gap_krylov_max()),
        format_value(row.cond_s),
        row.kept_rank.map_or_else(|| NA.to_string(), |k| k.to_string()),
        format_value(row.non_normality),
        format_value(row.eigvec_cond),
        format_value(Some(row.tau)),
        row.dim_d.to_string(),
        if record_wall_time {
            format!("{:.3}", row.wall_time_ms)
        } else {
            NA.to_string()
        },
    ]
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow], record_wall_time: bool) -> Result<(), OutputError> {
    let csv_err = |source| OutputError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_err)?;
    w.write_record(SWEEP_HEADER).map_err(csv_err)?;
    for row in rows {
        w.write_record(sweep_record(row, record_wall_time)).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

/// `x,p,w` with x as the outer loop.
pub fn write_wigner_csv(path: &Path, map: &WignerMap) -> Result<(), OutputError> {
    let csv_err = |source| OutputError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_err)?;
    w.write_record(["x", "p", "w"]).map_err(csv_err)?;
    for (x, p, v) in map.points() {
        w.write_record([format!("{x:?}"), format!("{p:?}"), format!("{v:?}")])
            .map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn wigner_file_name(index: usize, req: &WignerRequest) -> String {
    let state = match req.state {
        StateKind::Steady => "steady",
        StateKind::Slow => "slow",
    };
    let source = match req.source {
        StateSource::Oracle => "oracle",
        StateSource::Krylov => "krylov",
    };
    format!("wigner_{index:02}_g{:?}_{state}_{source}.csv", req.g)
}

/// Result of one Wigner request, as handed to [`emit_outputs`].
pub struct WignerOutcome {
    pub request: WignerRequest,
    pub map: Result<WignerMap, String>,
}

#[derive(Serialize)]
struct ManifestPoint<'a> {
    g: f64,
    tau: f64,
    status: &'a PointStatus,
}

#[derive(Serialize)]
struct ManifestWigner<'a> {
    request: &'a WignerRequest,
    file: Option<String>,
    error: Option<&'a str>,
    coverage_warning: Option<bool>,
    max_imaginary: Option<f64>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    artifact: &'static str,
    version: &'static str,
    seed: u64,
    config: &'a RunConfig,
    points: Vec<ManifestPoint<'a>>,
    wigner: Vec<ManifestWigner<'a>>,
    files: Vec<String>,
    timing_ms: Vec<f64>,
    total_time_ms: f64,
}

/// Writes every artifact into `cfg.outputs.directory`, creating it if
/// needed, and returns the written paths.
pub fn emit_outputs(
    rows: &[SweepRow],
    wigner: &[WignerOutcome],
    cfg: &RunConfig,
    total_time_ms: f64,
) -> Result<Vec<PathBuf>, OutputError> {
    let dir = &cfg.outputs.directory;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();

    if cfg.outputs.formats.contains(&OutputFormat::Csv) {
        let path = dir.join(SWEEP_CSV);
        write_sweep_csv(&path, rows, cfg.outputs.record_wall_time)?;
        written.push(path);
    }
    if cfg.outputs.formats.contains(&OutputFormat::Json) {
        let path = dir.join(SWEEP_JSON);
        write_json(&path, &rows)?;
        written.push(path);
    }

    let mut wigner_entries = Vec::with_capacity(wigner.len());
    for (i, outcome) in wigner.iter().enumerate() {
        match &outcome.map {
            Ok(map) => {
                let name = wigner_file_name(i, &outcome.request);
                let path = dir.join(&name);
                write_wigner_csv(&path, map)?;
                written.push(path);
                wigner_entries.push(ManifestWigner {
                    request: &outcome.request,
                    file: Some(name),
                    error: None,
                    coverage_warning: Some(map.coverage_warning),
                    max_imaginary: Some(map.max_imaginary),
                });
            }
            Err(e) => wigner_entries.push(ManifestWigner {
                request: &outcome.request,
                file: None,
                error: Some(e),
                coverage_warning: None,
                max_imaginary: None,
            }),
        }
    }

    let manifest_path = dir.join(MANIFEST);
    let mut files: Vec<String> = written
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    files.push(MANIFEST.to_string());
    let manifest = Manifest {
        artifact: "liokry",
        version: ARTIFACT_VERSION,
        seed: cfg.krylov.seed,
        config: cfg,
        points: rows
            .iter()
            .map(|r| ManifestPoint {
                g: r.g,
                tau: r.tau,
                status: &r.status,
            })
            .collect(),
        wigner: wigner_entries,
        files,
        timing_ms: rows.iter().map(|r| r.wall_time_ms).collect(),
        total_time_ms,
    };
    write_json(&manifest_path, &manifest)?;
    written.push(manifest_path);
    Ok(written)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), OutputError> {
    let mut text = serde_json::to_string_pretty(value).expect("serialisable");
    text.push('\n');
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(text.as_bytes()).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::PointOutcome;

    fn row(gap: Option<f64>) -> SweepRow {
        SweepRow {
            g: 0.5,
            tau: 5.0,
            dim_d: 20,
            alpha_sq_mf: Some(10.0),
            gap_oracle: gap,
            gap_krylov: vec![],
            cond_s: Some(f64::INFINITY),
            kept_rank: None,
            non_normality: Some(0.25),
            eigvec_cond: None,
            wall_time_ms: 12.5,
            status: PointStatus {
                outcome: PointOutcome::Partial,
                messages: vec![],
            },
        }
    }

    #[test]
    fn missing_values_are_literal_na() {
        let cells = sweep_record(&row(None), false);
        assert_eq!(cells.len(), SWEEP_HEADER.len());
        for i in [2, 3, 4, 5, 6, 7, 9, 12] {
            assert_eq!(cells[i], NA, "column {}", SWEEP_HEADER[i]);
        }
        assert!(cells.iter().all(|c| !c.is_empty()));
    }

    #[test]
    fn values_round_trip_through_text() {
        let cells = sweep_record(&row(Some(0.1 + 0.2)), true);
        assert_eq!(cells[2].parse::<f64>().unwrap(), 0.1 + 0.2);
        assert_eq!(cells[12], "12.500");
        assert_eq!(cells[11], "20");
    }

    #[test]
    fn krylov_summary_statistics() {
        let mut r = row(None);
        r.gap_krylov = vec![1.0, 3.0, 2.0];
        assert_eq!(r.gap_krylov_mean(), Some(2.0));
        assert_eq!(r.gap_krylov_min(), Some(1.0));
        assert_eq!(r.gap_krylov_max(), Some(3.0));
    }
}
