//! Command-line frontend.

mod commands;
pub mod output;
pub mod sweep;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Result;
use crate::simulation::{CodebookGeometry, Strategy, DEFAULT_MAX_CODEWORDS, DEFAULT_RETRIES};
pub use output::{Emit, RunManifest};

/// Environment variable naming the default artifact directory.
pub const OUT_DIR_ENV: &str = "BANDCAP_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "bandcap",
    version,
    about = "Capacity and entropy of energy-limited band-limited signals"
)]
#[command(arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format; the default depends on the command
    #[arg(long, global = true, value_enum)]
    pub emit: Option<Emit>,

    /// Also write the artifact to this file
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Write artifacts as <dir>/<command>.<ext>
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,

    /// Significant digits for numeric output
    #[arg(long, global = true, default_value_t = 12, value_parser = clap::value_parser!(u8).range(1..=17))]
    pub precision: u8,

    #[arg(short, long, global = true)]
    pub verbose: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Eigenvalues of the time-frequency limiting operator
    Spectrum(SpectrumArgs),
    /// Degrees of freedom at approximation accuracy mu
    Dof(DofArgs),
    /// Capacity and entropy bounds, finite-N and per unit time
    Bounds(BoundsArgs),
    /// Exact 1-D packing/covering counts and greedy packings
    Oracle(OracleArgs),
    /// Random-codebook experiment with Monte Carlo error estimate
    Simulate(SimulateArgs),
    /// Error measure against observation time at a fixed rate
    ExponentSweep(ExponentSweepArgs),
    /// Deterministic against stochastic rates
    Compare(CompareArgs),
    /// Bounds (and optionally simulations) over a parameter grid
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Band {
    /// Bandwidth in rad/s (Hz with --hz)
    #[arg(long)]
    pub omega: f64,
    /// Read --omega in Hz
    #[arg(long)]
    pub hz: bool,
    /// Observation time in seconds
    #[arg(long)]
    pub t_obs: f64,
}

impl Band {
    pub fn omega_rad(&self) -> f64 {
        to_rad(self.omega, self.hz)
    }
}

fn to_rad(omega: f64, hz: bool) -> f64 {
    if hz {
        2.0 * std::f64::consts::PI * omega
    } else {
        omega
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub band: Band,
    /// Gauss-Legendre order
    #[arg(long)]
    pub order: Option<usize>,
    /// Dump sampled eigenfunctions to this binary file
    #[arg(long)]
    pub eigvecs: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub eigvec_count: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DofArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub band: Band,
    #[arg(long)]
    pub energy: f64,
    #[arg(long)]
    pub mu: f64,
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BoundsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub band: Band,
    #[arg(long)]
    pub energy: f64,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub delta: f64,
    /// Spectrum JSON (as written by `spectrum`) supplying zeta
    #[arg(long)]
    pub use_spectrum: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    Pack,
    Cover,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long)]
    pub eps: f64,
    /// Ball radius sqrt(E)
    #[arg(long)]
    pub radius: f64,
    #[arg(long, value_enum)]
    pub mode: OracleMode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Greedy packing attempts (dimension >= 2)
    #[arg(long, default_value_t = 8)]
    pub attempts: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SimulationOptions {
    /// Monte Carlo samples per codeword
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dimension N instead of the degrees of freedom at mu = eps
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, value_enum, default_value_t = CodebookGeometry::Spectrum)]
    pub geometry: CodebookGeometry,
    #[arg(long, default_value_t = DEFAULT_MAX_CODEWORDS)]
    pub max_codewords: u64,
    #[arg(long, value_enum, default_value_t = Strategy::Auto)]
    pub strategy: Strategy,
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub band: Band,
    #[arg(long)]
    pub energy: f64,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub delta: f64,
    /// Rate in bits/s; M = floor(2^(T R))
    #[arg(long, conflicts_with = "messages")]
    pub rate: Option<f64>,
    /// Codebook size M
    #[arg(long)]
    pub messages: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_RETRIES)]
    pub retries: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimulationOptions,
    /// Spectrum JSON to use instead of computing one
    #[arg(long)]
    pub use_spectrum: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ExponentSweepArgs {
    #[arg(long)]
    pub omega: f64,
    #[arg(long)]
    pub hz: bool,
    #[arg(long)]
    pub energy: f64,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Rate in bits/s, below the capacity lower bound
    #[arg(long)]
    pub rate: f64,
    /// Observation times, comma separated and ascending
    #[arg(long, value_delimiter = ',', required = true)]
    pub t_list: Vec<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimulationOptions,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CompareArgs {
    #[arg(long)]
    pub omega: f64,
    #[arg(long)]
    pub hz: bool,
    /// Signal-to-noise ratio E/eps^2, paired with P/sigma^2
    #[arg(long)]
    pub snr: f64,
    /// Time-bandwidth product for the lattice comparison
    #[arg(long)]
    pub n0: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepArgs {
    /// Grid configuration file
    pub config: PathBuf,
    /// Grid points evaluated concurrently
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Overwrite an existing output instead of resuming it
    #[arg(long)]
    pub restart: bool,
}

/// Parse `argv`, run the command and return the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .try_init();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("bandcap: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    commands::run(cli)
}
