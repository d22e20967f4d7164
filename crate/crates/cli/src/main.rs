//! `gamma-tail`: command-line front end emitting CSV, JSON and binary
//! artifacts. Every output file gets a `<file>.manifest.json` sidecar.
//!
//! Exit codes: 0 success, 2 bad input, 3 numerical failure, 4 a checked
//! invariant did not hold.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

const EXIT_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_INVARIANT: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "gamma-tail", version, about = "Distribution of infinite weighted sums of centered gamma variables")]
struct Cli {
    /// Worker threads (defaults to RAYON_NUM_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// σ_M, normalized tail cumulants and the Berry-Esseen bound as JSON.
    Cumulants(CumulantsArgs),
    /// Edgeworth CDF and density of the normalized tail as CSV (x, cdf, pdf).
    Edgeworth(EdgeworthArgs),
    /// Exact CDF (and density when bounded) of the head X_M as CSV.
    Head(HeadArgs),
    /// CDF of Z from head inversion convolved with the Edgeworth tail.
    Zdist(ZdistArgs),
    /// Monte-Carlo samples as little-endian f64.
    Mc(McArgs),
    /// KS distance between a CDF table and a sample file.
    Validate(ValidateArgs),
    /// Full worked example: r = 1/2, γ = 3/4, N = 5, M ∈ {2, 5, 10, 20}.
    #[command(name = "repro-sec6")]
    ReproSec6(ReproArgs),
}

#[derive(Debug, Args)]
struct CumulantsArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long = "M")]
    m: usize,
    #[arg(long = "K")]
    k: usize,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EdgeworthArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long = "M")]
    m: usize,
    #[arg(long = "N")]
    n: usize,
    /// lo:hi:n, n points with both ends included.
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct HeadArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long = "M")]
    m: usize,
    /// lo:hi:n; defaults to the support start through mean + 10 sd.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ZdistArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long = "M")]
    m: usize,
    #[arg(long = "N")]
    n: usize,
    /// lo:hi:n; defaults to ±8 sd with 2001 points.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated truncation levels for the sup-distance check.
    #[arg(long, value_delimiter = ',')]
    robustness: Option<Vec<usize>>,
    /// Monte-Carlo samples for a KS check (0 disables it).
    #[arg(long, default_value_t = 0)]
    mc_samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Tail quadrature nodes.
    #[arg(long, default_value_t = gamma_tail::pipeline::DEFAULT_QUAD_POINTS)]
    quad_points: usize,
    /// Write the JSON summary here as well as to stdout.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct McArgs {
    #[arg(long)]
    spec: PathBuf,
    /// truncate or normal_tail.
    #[arg(long, default_value = "normal_tail")]
    mode: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Terms per sample; chosen automatically when omitted.
    #[arg(long)]
    n_terms: Option<usize>,
    /// z, head:M or tail:M (the normalized tail Ỹ_M).
    #[arg(long, default_value = "z")]
    target: String,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    table: PathBuf,
    #[arg(long)]
    samples: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReproArgs {
    #[arg(long, default_value = "repro-sec6")]
    out_dir: PathBuf,
    /// Monte-Carlo samples for the KS check at M = 10 (0 disables it).
    #[arg(long, default_value_t = 1_000_000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<commands::InvariantViolation>().is_some() {
        return EXIT_INVARIANT;
    }
    match err.chain().find_map(|e| e.downcast_ref::<gamma_tail::Error>()) {
        Some(e) if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    }
    let result = match cli.command {
        Command::Cumulants(a) => commands::cumulants_cmd(a, argv),
        Command::Edgeworth(a) => commands::edgeworth(a, argv),
        Command::Head(a) => commands::head(a, argv),
        Command::Zdist(a) => commands::zdist(a, argv),
        Command::Mc(a) => commands::mc(a, argv),
        Command::Validate(a) => commands::validate(a, argv),
        Command::ReproSec6(a) => commands::repro(a, argv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
