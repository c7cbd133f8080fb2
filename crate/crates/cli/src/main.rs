//! `culling`: bound-state thresholds, phase diagrams and culling schedules for
//! interacting bosons in a 1D square well.
//!
//! Each subcommand reads an optional TOML config, applies command-line
//! overrides, and writes CSV/JSON results plus `manifest.json` into `--out`.
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use culling::config::RunConfig;
use culling::{CullError, Method};

#[derive(Parser)]
#[command(name = "culling", version, about)]
struct Cli {
    /// TOML configuration file. Missing sections take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV/JSON output and the manifest.
    #[arg(long, global = true, default_value = "culling-out")]
    out: PathBuf,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "CULLING_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Level curves against well depth (tonks or diag).
    Spectrum(SpectrumArgs),
    /// Two-orbital variational parameters against well depth.
    Variational(VariationalArgs),
    /// Unbinding thresholds over a (g, V0) grid.
    Phase(PhaseArgs),
    /// Culling staircase and ramp-speed analysis.
    Cull(CullArgs),
    /// One diffusion Monte Carlo ground-state run.
    Dmc(DmcArgs),
}

#[derive(Args)]
pub struct SpectrumArgs {
    /// tonks or diag.
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub g: Option<f64>,
    /// Excited levels per particle number.
    #[arg(long)]
    pub excitations: Option<usize>,
    /// Box modes for diag.
    #[arg(long)]
    pub modes: Option<usize>,
}

#[derive(Args)]
pub struct VariationalArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub g: Option<f64>,
}

#[derive(Args)]
pub struct PhaseArgs {
    /// tonks, tf, diag or dmc.
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Comma-separated couplings replacing the configured grid.
    #[arg(long, value_delimiter = ',')]
    pub g: Option<Vec<f64>>,
}

#[derive(Args)]
pub struct CullArgs {
    /// Staircase backend: tonks, tf, diag or dmc.
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long)]
    pub g: Option<f64>,
    /// Particle number to stop at.
    #[arg(long)]
    pub n_target: Option<usize>,
    /// Safety factor in r <= eta E_gap dV.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Stage model for the ramp check: tonks or meanfield.
    #[arg(long)]
    pub limit: Option<String>,
    /// Exponential ramp time constant.
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Args)]
pub struct DmcArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long)]
    pub depth: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub walkers: Option<usize>,
    #[arg(long)]
    pub blocks: Option<usize>,
    #[arg(long)]
    pub steps_per_block: Option<usize>,
    #[arg(long)]
    pub time_step: Option<f64>,
    /// Also run at half the time step and extrapolate.
    #[arg(long)]
    pub timestep_check: bool,
}

/// Failure categories that map onto exit codes.
#[derive(Debug)]
pub enum Failure {
    Config { line: Option<usize>, message: String },
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config { .. } => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn record(&self) -> serde_json::Value {
        match self {
            Failure::Config { line, message } => serde_json::json!({
                "error": { "kind": "config", "line": line, "message": message }
            }),
            Failure::Numerical(message) => serde_json::json!({
                "error": { "kind": "numerical", "message": message }
            }),
        }
    }
}

impl From<CullError> for Failure {
    fn from(e: CullError) -> Self {
        match e {
            CullError::Config { line, message } => Failure::Config { line, message },
            e if e.is_numerical() => Failure::Numerical(e.to_string()),
            e => Failure::Config {
                line: None,
                message: e.to_string(),
            },
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config {
            line: None,
            message: format!("output: {e}"),
        }
    }
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig, Failure> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Config {
                line: None,
                message: format!("cannot read {}: {e}", p.display()),
            })?;
            Ok(RunConfig::from_toml(&text)?)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Failure::Config {
                line: None,
                message: "worker count must be at least 1".into(),
            });
        }
        // only fails if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    let cfg = load_config(cli.config.as_ref())?;
    let ctx = commands::Context {
        config_path: cli.config.clone(),
        out: output::OutputDir::create(&cli.out)?,
    };
    match cli.command {
        Command::Spectrum(a) => commands::spectrum(ctx, cfg, a),
        Command::Variational(a) => commands::variational(ctx, cfg, a),
        Command::Phase(a) => commands::phase(ctx, cfg, a),
        Command::Cull(a) => commands::cull(ctx, cfg, a),
        Command::Dmc(a) => commands::dmc(ctx, cfg, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.record());
            ExitCode::from(f.code())
        }
    }
}
