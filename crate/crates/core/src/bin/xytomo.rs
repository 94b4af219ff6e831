use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use xytomo::cli::{self, CliOptions, CommandKind};

/// Fourier-space tomography and purity estimation harness.
#[derive(Parser)]
#[command(name = "xytomo", version, about)]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// Path to the TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread count (default: rayon's choice; also XYTOMO_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (default: config output_dir, XYTOMO_OUT, or ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Validate the config and write headers only.
    #[arg(long, global = true, default_value_t = false)]
    dry_run: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate random density-matrix ensembles plus a manifest.
    Genrho,
    /// Tomography variance sweep (empirical vs predicted scaling).
    Tomo,
    /// Purity-estimator variance sweep.
    Purity,
    /// Smallest frequency-combination study for the single-drive protocol.
    Limited,
    /// Print the per-qubit inverse-map factor tables.
    InspectInverse,
    /// Run the oracle conformance suite.
    Conformance,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let kind = match args.command {
        Cmd::Genrho => CommandKind::GenRho,
        Cmd::Tomo => CommandKind::Tomo,
        Cmd::Purity => CommandKind::Purity,
        Cmd::Limited => CommandKind::Limited,
        Cmd::InspectInverse => CommandKind::InspectInverse,
        Cmd::Conformance => CommandKind::Conformance,
    };
    let opts = CliOptions {
        config: args.config,
        seed: args.seed,
        threads: args.threads,
        out: args.out,
        dry_run: args.dry_run,
    };
    match cli::run(kind, &opts) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
