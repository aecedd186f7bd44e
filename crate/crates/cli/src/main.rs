//! `lame-spectra`: band edges, Bloch spectra, identity checks, pole flows, curve points
//! and curve coefficients of the elliptic difference Lamé operator.
//!
//! Exit codes: 0 success, 1 verification or numerical failure, 2 invalid input (including
//! torsion η and lattice collisions), 3 ambiguous root clusters, 4 pole margin violation.

mod commands;
mod config;
mod parse;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use crate::commands::{run, Failure};

#[derive(Debug, Parser)]
#[command(name = "lame-spectra", version, about = "Spectral curves and band edges of the elliptic difference Lamé operator")]
struct Cli {
    /// key = value file with defaults for any flag; command-line flags win.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    /// One JSON object per line (flow trajectories).
    Jsonl,
}

/// Parameters shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Operator order ℓ.
    #[arg(long, default_value_t = 1)]
    pub ell: usize,
    /// Lattice spacing η as a+bi or as an exact rational P/Q.
    #[arg(long, default_value = "0.17")]
    pub eta: String,
    /// Modular parameter τ as a+bi with Im τ > 0.
    #[arg(long, default_value = "1.2i")]
    pub tau: String,
    /// Series truncation and comparison tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Seed for randomized checks and searches.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the output here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Band edges as common roots of the edge polynomials, per half-period label.
    #[command(args_override_self = true)]
    Edges {
        #[command(flatten)]
        common: Common,
    },
    /// Bloch band structure of the periodic problem for rational η = P/Q.
    #[command(args_override_self = true)]
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Number of quasi-momenta over one Brillouin zone (rounded up to even).
        #[arg(long, default_value_t = 64)]
        kpoints: usize,
        /// Lattice offset x₀.
        #[arg(long, default_value = "0.123456")]
        x0: String,
    },
    /// Identity suites; exits with 1 if any check fails.
    #[command(args_override_self = true)]
    Verify {
        #[command(flatten)]
        common: Common,
        /// Suite name or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Volterra flow of elliptic poles.
    #[command(args_override_self = true)]
    Flow {
        #[command(flatten)]
        common: Common,
        /// Comma-separated initial poles a+bi.
        #[arg(long, conflicts_with_all = ["locus_seed", "degenerate"])]
        poles: Option<String>,
        /// Search for an on-locus configuration with ℓ(ℓ+1)/2 poles (uses --seed).
        #[arg(long, conflicts_with = "degenerate")]
        locus_seed: bool,
        /// Start from the degenerate configuration of the Lamé coefficient itself.
        #[arg(long)]
        degenerate: bool,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// Largest gap between the two pole systems accepted at the start.
        #[arg(long, default_value_t = 1e-9)]
        tol_locus: f64,
        /// Compare numeric band edges at the start and end (needs rational η).
        #[arg(long)]
        isospectral: bool,
        /// Lattice offset x₀ for the isospectrality check.
        #[arg(long, default_value = "0.123456")]
        x0: String,
    },
    /// Points of the spectral curve over a fixed ζ, or a Newton solve at fixed E.
    #[command(args_override_self = true)]
    CurvePoint {
        #[command(flatten)]
        common: Common,
        /// Fixed ζ: report every point of the fiber.
        #[arg(long, conflicts_with = "energy")]
        zeta: Option<String>,
        /// Fixed E: Newton solve for (ζ, K) from --seed-zeta and --seed-k.
        #[arg(long, requires_all = ["seed_zeta", "seed_k"])]
        energy: Option<String>,
        #[arg(long)]
        seed_zeta: Option<String>,
        #[arg(long)]
        seed_k: Option<String>,
        /// Largest relative spread of WΨ/Ψ accepted for the W eigenvalue.
        #[arg(long, default_value_t = 1e-7)]
        max_spread: f64,
    },
    /// Elliptic numbers, curve coefficients C_j, A-polynomials and edge polynomials.
    #[command(args_override_self = true)]
    Coeffs {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Edges { common }
            | Command::Spectrum { common, .. }
            | Command::Verify { common, .. }
            | Command::Flow { common, .. }
            | Command::CurvePoint { common, .. }
            | Command::Coeffs { common } => common,
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("LAME_SPECTRA_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("LAME_SPECTRA_THREADS must be a positive integer, got '{value}'"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn parse_args() -> Result<Cli, Failure> {
    let mut args: Vec<String> = std::env::args().collect();
    let path = config::take_config_flag(&mut args).map_err(Failure::Usage)?;
    if let Some(path) = path {
        let entries = config::read_config(path.as_ref()).map_err(Failure::Usage)?;
        config::splice_config(&mut args, &entries, &Cli::command()).map_err(Failure::Usage)?;
    }
    Cli::try_parse_from(args).map_err(Failure::Clap)
}

fn emit(text: &str, target: Option<&PathBuf>) -> std::io::Result<()> {
    match target {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = match parse_args() {
        Ok(cli) => cli,
        Err(Failure::Clap(e)) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            return ExitCode::from(f.exit_code());
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let target = cli.command.common().output.clone();
    let outcome = run(&cli.command);
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(msg) = &outcome.error {
        eprintln!("error: {msg}");
    }
    if let Some(text) = &outcome.text {
        if let Err(e) = emit(text, target.as_ref()) {
            eprintln!("error: cannot write output: {e}");
            return ExitCode::from(1);
        }
    }
    ExitCode::from(outcome.exit)
}
