//! Run configuration: one strictly validated JSON document.
//!
//! Parsing goes through a permissive-in-shape, strict-in-keys raw layer and
//! resolves into [`RunConfig`], where every default is explicit. A resolved
//! config serialises back into a document that parses to itself.

use std::path::PathBuf;

use liokry_core::fock::KerrCatParams;
use liokry_core::krylov::{KrylovConfig, KrylovMethod};
use liokry_core::wigner::PhaseSpaceGrid;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_N_LEVELS: usize = 30;
pub const DEFAULT_KAPPA: f64 = 1.0;
pub const DEFAULT_DELTA: f64 = 0.2;
pub const DEFAULT_KERR: f64 = 0.05;
pub const DEFAULT_DIM_D: usize = 20;
pub const DEFAULT_TAU: f64 = 5.0;
pub const DEFAULT_REPETITIONS: usize = 3;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_N_PAIRS: usize = 4;
pub const DEFAULT_OUTPUT_DIR: &str = "liokry-out";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("config error at `{path}`: {reason}")]
    Invalid { path: String, reason: String },
}

fn invalid(path: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        path: path.to_string(),
        reason: reason.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ProjectedGenerator,
    TransferMatrix,
}

impl From<Method> for KrylovMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::ProjectedGenerator => KrylovMethod::ProjectedGenerator,
            Method::TransferMatrix => KrylovMethod::TransferMatrix,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Steady,
    Slow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StateSource {
    /// Dense eigendecomposition.
    Oracle,
    /// Reconstruction from the Krylov weights.
    Krylov,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GSweep {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    pub spacing: Spacing,
}

impl GSweep {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k == 0 {
                    return self.start;
                }
                if k + 1 == self.steps {
                    return self.stop;
                }
                let t = k as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.start + (self.stop - self.start) * t,
                    Spacing::Log => (self.start.ln() + (self.stop.ln() - self.start.ln()) * t).exp(),
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KrylovSection {
    pub dim_d: usize,
    pub tau_list: Vec<f64>,
    pub threshold: f64,
    pub method: Method,
    pub repetitions: usize,
    pub seed: u64,
    pub n_pairs: usize,
}

impl KrylovSection {
    pub fn krylov_config(&self, tau: f64) -> KrylovConfig {
        KrylovConfig {
            dim_d: self.dim_d,
            tau,
            threshold: self.threshold,
            method: self.method.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSection {
    pub x_points: usize,
    pub p_points: usize,
    pub x_range: [f64; 2],
    pub p_range: [f64; 2],
}

impl GridSection {
    pub fn grid(&self) -> PhaseSpaceGrid {
        PhaseSpaceGrid {
            x_points: self.x_points,
            p_points: self.p_points,
            x_range: (self.x_range[0], self.x_range[1]),
            p_range: (self.p_range[0], self.p_range[1]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
    /// Off by default so that repeated runs give byte-identical CSVs.
    pub record_wall_time: bool,
    pub wigner_grid: GridSection,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WignerRequest {
    pub g: f64,
    pub state: StateKind,
    pub source: StateSource,
}

/// Fully resolved run description.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub n_levels: usize,
    pub kappa_1ph: f64,
    pub delta: f64,
    pub kerr: f64,
    pub g_sweep: GSweep,
    pub krylov: KrylovSection,
    pub outputs: OutputSection,
    pub oracle_enabled: bool,
    pub wigner_requests: Vec<WignerRequest>,
}

impl RunConfig {
    pub fn params(&self, g: f64) -> KerrCatParams {
        KerrCatParams {
            delta: self.delta,
            kerr: self.kerr,
            drive: g,
            kappa_1ph: self.kappa_1ph,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n_levels: Option<usize>,
    kappa_1ph: Option<f64>,
    delta: Option<f64>,
    kerr: Option<f64>,
    g_sweep: RawSweep,
    krylov: Option<RawKrylov>,
    outputs: Option<RawOutputs>,
    oracle_enabled: Option<bool>,
    wigner_requests: Option<Vec<RawWigner>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    start: f64,
    stop: f64,
    steps: usize,
    spacing: Option<Spacing>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKrylov {
    dim_d: Option<usize>,
    tau: Option<f64>,
    tau_list: Option<Vec<f64>>,
    threshold: Option<f64>,
    method: Option<Method>,
    repetitions: Option<usize>,
    seed: Option<u64>,
    n_pairs: Option<usize>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutputs {
    directory: Option<PathBuf>,
    formats: Option<Vec<OutputFormat>>,
    record_wall_time: Option<bool>,
    wigner_grid: Option<RawGrid>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    x_points: usize,
    p_points: usize,
    x_range: [f64; 2],
    p_range: [f64; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWigner {
    g: f64,
    state: StateKind,
    source: Option<StateSource>,
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::Parse {
            path: if path == "." { "<root>".into() } else { path },
            message: e.into_inner().to_string(),
        }
    })?;
    de.end().map_err(|e| ConfigError::Parse {
        path: "<root>".into(),
        message: e.to_string(),
    })?;
    resolve(raw)
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

fn finite(path: &str, x: f64) -> Result<f64, ConfigError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(path, format!("must be finite, got {x}")))
    }
}

fn resolve(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let n_levels = raw.n_levels.unwrap_or(DEFAULT_N_LEVELS);
    if n_levels < 2 {
        return Err(invalid("n_levels", format!("must be at least 2, got {n_levels}")));
    }
    let kappa_1ph = finite("kappa_1ph", raw.kappa_1ph.unwrap_or(DEFAULT_KAPPA))?;
    if kappa_1ph < 0.0 {
        return Err(invalid("kappa_1ph", "must be non-negative"));
    }
    let delta = finite("delta", raw.delta.unwrap_or(DEFAULT_DELTA))?;
    let kerr = finite("kerr", raw.kerr.unwrap_or(DEFAULT_KERR))?;
    if kerr <= 0.0 {
        return Err(invalid("kerr", "must be positive"));
    }

    let sweep = raw.g_sweep;
    let g_sweep = GSweep {
        start: finite("g_sweep.start", sweep.start)?,
        stop: finite("g_sweep.stop", sweep.stop)?,
        steps: sweep.steps,
        spacing: sweep.spacing.unwrap_or(Spacing::Linear),
    };
    if g_sweep.steps == 0 {
        return Err(invalid("g_sweep.steps", "must be at least 1"));
    }
    if g_sweep.start < 0.0 || g_sweep.stop < 0.0 {
        return Err(invalid("g_sweep", "drive strengths must be non-negative"));
    }
    if g_sweep.spacing == Spacing::Log && (g_sweep.start <= 0.0 || g_sweep.stop <= 0.0) {
        return Err(invalid("g_sweep.spacing", "log spacing needs positive start and stop"));
    }

    let k = raw.krylov.unwrap_or_default();
    let tau_list = match (k.tau, k.tau_list) {
        (Some(_), Some(_)) => return Err(invalid("krylov.tau", "give either tau or tau_list, not both")),
        (Some(t), None) => vec![t],
        (None, Some(list)) => list,
        (None, None) => vec![DEFAULT_TAU],
    };
    if tau_list.is_empty() {
        return Err(invalid("krylov.tau_list", "must not be empty"));
    }
    for (i, &t) in tau_list.iter().enumerate() {
        if !(t.is_finite() && t > 0.0) {
            return Err(invalid(&format!("krylov.tau_list[{i}]"), format!("must be positive, got {t}")));
        }
    }
    let krylov = KrylovSection {
        dim_d: k.dim_d.unwrap_or(DEFAULT_DIM_D),
        tau_list,
        threshold: k.threshold.unwrap_or(KrylovConfig::DEFAULT_THRESHOLD),
        method: k.method.unwrap_or(Method::ProjectedGenerator),
        repetitions: k.repetitions.unwrap_or(DEFAULT_REPETITIONS),
        seed: k.seed.unwrap_or(DEFAULT_SEED),
        n_pairs: k.n_pairs.unwrap_or(DEFAULT_N_PAIRS),
    };
    if krylov.dim_d < 2 {
        return Err(invalid("krylov.dim_d", format!("must be at least 2, got {}", krylov.dim_d)));
    }
    if !(krylov.threshold > 0.0 && krylov.threshold < 1.0) {
        return Err(invalid("krylov.threshold", format!("must lie in (0, 1), got {}", krylov.threshold)));
    }
    if krylov.repetitions == 0 {
        return Err(invalid("krylov.repetitions", "must be at least 1"));
    }
    if krylov.n_pairs == 0 {
        return Err(invalid("krylov.n_pairs", "must be at least 1"));
    }
    if 2 * krylov.n_pairs > n_levels {
        return Err(invalid(
            "krylov.n_pairs",
            format!("{} pairs need at least {} levels, n_levels is {n_levels}", krylov.n_pairs, 2 * krylov.n_pairs),
        ));
    }

    let o = raw.outputs.unwrap_or_default();
    let formats = o.formats.unwrap_or_else(|| vec![OutputFormat::Csv]);
    if formats.is_empty() {
        return Err(invalid("outputs.formats", "must not be empty"));
    }
    for (i, f) in formats.iter().enumerate() {
        if formats[..i].contains(f) {
            return Err(invalid(&format!("outputs.formats[{i}]"), "duplicate format"));
        }
    }
    let default_grid = PhaseSpaceGrid::default();
    let wigner_grid = match o.wigner_grid {
        Some(g) => GridSection {
            x_points: g.x_points,
            p_points: g.p_points,
            x_range: g.x_range,
            p_range: g.p_range,
        },
        None => GridSection {
            x_points: default_grid.x_points,
            p_points: default_grid.p_points,
            x_range: [default_grid.x_range.0, default_grid.x_range.1],
            p_range: [default_grid.p_range.0, default_grid.p_range.1],
        },
    };
    wigner_grid
        .grid()
        .validate()
        .map_err(|e| invalid("outputs.wigner_grid", e.to_string()))?;
    let outputs = OutputSection {
        directory: o.directory.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        formats,
        record_wall_time: o.record_wall_time.unwrap_or(false),
        wigner_grid,
    };

    let mut wigner_requests = Vec::new();
    for (i, w) in raw.wigner_requests.unwrap_or_default().into_iter().enumerate() {
        let path = format!("wigner_requests[{i}]");
        let g = finite(&format!("{path}.g"), w.g)?;
        if g < 0.0 {
            return Err(invalid(&format!("{path}.g"), "must be non-negative"));
        }
        let source = w.source.unwrap_or(StateSource::Oracle);
        if w.state == StateKind::Steady && source == StateSource::Krylov {
            return Err(invalid(
                &format!("{path}.source"),
                "trace-free Krylov subspaces carry no steady state; use oracle",
            ));
        }
        wigner_requests.push(WignerRequest {
            g,
            state: w.state,
            source,
        });
    }

    Ok(RunConfig {
        n_levels,
        kappa_1ph,
        delta,
        kerr,
        g_sweep,
        krylov,
        outputs,
        oracle_enabled: raw.oracle_enabled.unwrap_or(true),
        wigner_requests,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"g_sweep": {"start": 0.1, "stop": 2.0, "steps": 4, "spacing": "log"}}"#;

    fn err_path(text: &str) -> String {
        match parse_config(text) {
            Err(ConfigError::Parse { path, .. }) | Err(ConfigError::Invalid { path, .. }) => path,
            other => panic!("expected error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_document_gets_reference_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.kappa_1ph, 1.0);
        assert_eq!(cfg.delta, 0.2);
        assert_eq!(cfg.kerr, 0.05);
        assert_eq!(cfg.n_levels, 30);
        assert_eq!(cfg.krylov.dim_d, 20);
        assert_eq!(cfg.krylov.tau_list, vec![DEFAULT_TAU]);
        assert_eq!(cfg.krylov.threshold, 1e-12);
        assert_eq!(cfg.krylov.repetitions, 3);
        assert!(cfg.oracle_enabled);
        assert!(cfg.wigner_requests.is_empty());
        assert_eq!(cfg.outputs.formats, vec![OutputFormat::Csv]);
    }

    #[test]
    fn resolved_config_round_trips() {
        let text = r#"{
            "g_sweep": {"start": 0.0, "stop": 1.0, "steps": 3},
            "krylov": {"tau_list": [1.0, 2.5], "method": "transfer_matrix", "seed": 9},
            "wigner_requests": [{"g": 0.5, "state": "slow", "source": "krylov"}]
        }"#;
        let cfg = parse_config(text).unwrap();
        let again = parse_config(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn zero_steps_names_the_key() {
        let text = r#"{"g_sweep": {"start": 0.1, "stop": 2.0, "steps": 0}}"#;
        assert_eq!(err_path(text), "g_sweep.steps");
    }

    #[test]
    fn duplicate_keys_rejected() {
        let text = r#"{"g_sweep": {"start": 0.1, "start": 0.2, "stop": 2.0, "steps": 3}}"#;
        assert!(matches!(parse_config(text), Err(ConfigError::Parse { .. })));
    }

    #[test]
    fn unknown_keys_rejected_with_path() {
        let text = r#"{"g_sweep": {"start": 0.1, "stop": 2.0, "steps": 3}, "krylov": {"dimd": 3}}"#;
        assert_eq!(err_path(text), "krylov.dimd");
    }

    #[test]
    fn type_mismatch_names_the_key() {
        let text = r#"{"g_sweep": {"start": 0.1, "stop": 2.0, "steps": 3}, "krylov": {"dim_d": "ten"}}"#;
        assert_eq!(err_path(text), "krylov.dim_d");
    }

    #[test]
    fn missing_sweep_is_an_error() {
        assert!(parse_config("{}").is_err());
    }

    #[test]
    fn range_checks() {
        let base = |extra: &str| format!(r#"{{"g_sweep": {{"start": 0.1, "stop": 2.0, "steps": 3}}, {extra}}}"#);
        assert_eq!(err_path(&base(r#""krylov": {"tau": 1.0, "tau_list": [1.0]}"#)), "krylov.tau");
        assert_eq!(err_path(&base(r#""krylov": {"tau_list": []}"#)), "krylov.tau_list");
        assert_eq!(err_path(&base(r#""krylov": {"tau_list": [1.0, -2.0]}"#)), "krylov.tau_list[1]");
        assert_eq!(err_path(&base(r#""krylov": {"repetitions": 0}"#)), "krylov.repetitions");
        assert_eq!(err_path(&base(r#""krylov": {"dim_d": 1}"#)), "krylov.dim_d");
        assert_eq!(err_path(&base(r#""krylov": {"threshold": 1.5}"#)), "krylov.threshold");
        assert_eq!(err_path(&base(r#""kerr": 0.0"#)), "kerr");
        assert_eq!(err_path(&base(r#""n_levels": 6, "krylov": {"n_pairs": 4}"#)), "krylov.n_pairs");
        assert_eq!(
            err_path(&base(r#""wigner_requests": [{"g": 0.5, "state": "steady", "source": "krylov"}]"#)),
            "wigner_requests[0].source"
        );
        assert_eq!(err_path(&base(r#""outputs": {"formats": ["csv", "csv"]}"#)), "outputs.formats[1]");
    }

    #[test]
    fn sweep_values() {
        let lin = GSweep {
            start: 0.0,
            stop: 1.0,
            steps: 5,
            spacing: Spacing::Linear,
        };
        assert_eq!(lin.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let log = GSweep {
            start: 0.1,
            stop: 10.0,
            steps: 3,
            spacing: Spacing::Log,
        };
        let v = log.values();
        assert_eq!(v[0], 0.1);
        assert!((v[1] - 1.0).abs() < 1e-15);
        assert_eq!(v[2], 10.0);
        let single = GSweep { steps: 1, ..lin };
        assert_eq!(single.values(), vec![0.0]);
    }
}
