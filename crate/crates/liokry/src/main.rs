use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use liokry::config::{load_config, ConfigError, RunConfig, StateKind, StateSource};
use liokry::output::{write_wigner_csv, OutputError};
use liokry::sweep::SweepOptions;
use liokry::{run, wigner_map, RunError};
use liokry_core::fock::FockSpace;
use liokry_core::liouville::{full_spectrum_oracle, kerr_cat_liouvillian};
use liokry_core::numerics::NumericSettings;

/// Liouvillian spectral gaps of a driven Kerr resonator, by dense
/// diagonalisation and by real-time Krylov subspaces.
#[derive(Parser)]
#[command(name = "liokry", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured drive sweep and write CSV artifacts and a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, overriding outputs.directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Skip the dense reference diagonalisation.
        #[arg(long)]
        no_oracle: bool,
        /// Relative singular-value cutoff on the overlap matrix, overriding krylov.threshold.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Print the full Liouvillian spectrum at one drive as re_lambda,im_lambda.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        g: f64,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the Wigner map of the steady state or slow mode as x,p,w.
    Wigner {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        g: f64,
        #[arg(long, value_enum)]
        state: StateKind,
        #[arg(long, value_enum, default_value = "oracle")]
        source: StateSource,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("liokry: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load(path: &Path) -> Result<RunConfig, RunError> {
    Ok(load_config(path)?)
}

fn check_drive(g: f64) -> Result<(), RunError> {
    if g.is_finite() && g >= 0.0 {
        Ok(())
    } else {
        Err(RunError::Runtime(format!("--g must be a non-negative number, got {g}")))
    }
}

fn dispatch(cmd: Command) -> Result<(), RunError> {
    match cmd {
        Command::Run {
            config,
            out,
            workers,
            no_oracle,
            threshold,
        } => {
            let mut cfg = load(&config)?;
            if let Some(t) = threshold {
                if !(t > 0.0 && t < 1.0) {
                    return Err(RunError::Config(ConfigError::Invalid {
                        path: "--threshold".into(),
                        reason: format!("must lie in (0, 1), got {t}"),
                    }));
                }
                cfg.krylov.threshold = t;
            }
            if let Some(dir) = out {
                cfg.outputs.directory = dir;
            }
            if no_oracle {
                cfg.oracle_enabled = false;
            }
            let summary = run(&cfg, SweepOptions { workers })?;
            for f in &summary.files {
                println!("{}", f.display());
            }
            Ok(())
        }
        Command::Oracle { config, g, out } => {
            let cfg = load(&config)?;
            check_drive(g)?;
            let settings = NumericSettings::default();
            let space = FockSpace::new(cfg.n_levels).map_err(|e| RunError::Runtime(e.to_string()))?;
            let l = kerr_cat_liouvillian(space, &cfg.params(g), &settings)
                .map_err(|e| RunError::Runtime(e.to_string()))?;
            let spec = full_spectrum_oracle(&l, &settings).map_err(|e| RunError::Runtime(e.to_string()))?;
            let mut text = String::from("re_lambda,im_lambda\n");
            for z in &spec.eigenvalues {
                text.push_str(&format!("{:?},{:?}\n", z.re, z.im));
            }
            emit_text(out.as_deref(), &text)
        }
        Command::Wigner {
            config,
            g,
            state,
            source,
            out,
        } => {
            let cfg = load(&config)?;
            check_drive(g)?;
            if state == StateKind::Steady && source == StateSource::Krylov {
                return Err(RunError::Runtime(
                    "the Krylov subspace is trace-free and carries no steady state".into(),
                ));
            }
            let map = wigner_map(&cfg, g, state, source).map_err(RunError::Runtime)?;
            match out {
                Some(path) => Ok(write_wigner_csv(&path, &map)?),
                None => {
                    let mut text = String::from("x,p,w\n");
                    for (x, p, w) in map.points() {
                        text.push_str(&format!("{x:?},{p:?},{w:?}\n"));
                    }
                    emit_text(None, &text)
                }
            }
        }
    }
}

fn emit_text(path: Option<&Path>, text: &str) -> Result<(), RunError> {
    let result = match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    result.map_err(|source| {
        RunError::Output(OutputError::Io {
            path: path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf),
            source,
        })
    })
}
