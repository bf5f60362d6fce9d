//! `accelmap`: runs detector scenarios and writes plot-ready data.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error,
//! 3 quadrature did not converge (outputs are still written and flagged),
//! 4 an invariant check failed.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use accelmap_core::config::ScenarioConfig;
use clap::{Parser, Subcommand};

/// Environment variable that sets the number of worker threads.
pub const THREADS_ENV: &str = "ACCELMAP_THREADS";

#[derive(Parser, Debug)]
#[command(name = "accelmap", version, about = "Dynamical maps of an accelerated finite-size detector")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON scenario file; defaults apply to every missing key.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory, overriding `output.directory`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Bloch samples for `bloch-scan`, oracle cells per axis for `oracle-compare`.
    #[arg(long, global = true, value_name = "N")]
    samples: Option<usize>,

    /// Relative quadrature tolerance, overriding `quadrature.rel_tol`.
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Maps, spectra and state samples for the configured trajectory.
    Run,
    /// B-matrix spectrum along the configured sweep.
    SweepEigs,
    /// Image of the pure states under the configured map.
    BlochScan,
    /// Invariant suite over the configured grid.
    Verify,
    /// Adaptive quadrature against the midpoint oracle.
    OracleCompare,
}

#[derive(Debug)]
pub enum Failure {
    Io(String),
    Config(String),
    NonConvergence(String),
    Invariant(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::NonConvergence(_) => 3,
            Failure::Invariant(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Io(m) => write!(f, "I/O error: {m}"),
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::NonConvergence(m) => write!(f, "quadrature did not converge: {m}"),
            Failure::Invariant(m) => write!(f, "invariant check failed: {m}"),
        }
    }
}

impl From<accelmap_core::Error> for Failure {
    fn from(e: accelmap_core::Error) -> Self {
        match e {
            accelmap_core::Error::Config(m) => Failure::Config(m),
            other => Failure::Invariant(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn load(cli: &Cli) -> Result<ScenarioConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(dir) = &cli.out {
        cfg.output.directory = dir.clone();
    }
    if let Some(tol) = cli.tol {
        cfg.quadrature.rel_tol = tol;
    }
    if let Some(n) = cli.samples {
        cfg.bloch.n_samples = n;
        cfg.oracle.n = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(e.to_string()))
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    configure_threads()?;
    let cfg = load(cli)?;
    match cli.command {
        Command::Run => commands::run(&cfg),
        Command::SweepEigs => commands::sweep_eigs(&cfg),
        Command::BlochScan => commands::bloch_scan(&cfg),
        Command::Verify => commands::verify(&cfg),
        Command::OracleCompare => commands::oracle_compare(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("accelmap: {f}");
            ExitCode::from(f.code())
        }
    }
}
