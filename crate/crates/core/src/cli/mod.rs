//! Experiment harness behind the `xytomo` binary: deterministic sweeps
//! reproducing the variance-scaling and frequency-combination studies, with
//! CSV outputs shaped for external plotting.
//!
//! Every output is byte-stable under re-runs with the same config and seed,
//! independent of thread count: all randomness is derived from the config
//! seed by counter-based stream derivation, and rows are emitted in sorted
//! order after the parallel work completes.

pub mod config;
mod commands;

use std::path::PathBuf;

pub use commands::{
    cmd_conformance, cmd_genrho, cmd_inspect_inverse, cmd_limited, cmd_purity, cmd_tomo,
};
pub use config::HarnessConfig;

use crate::error::{Error, Result};

/// Subcommands of the harness.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum CommandKind {
    GenRho,
    Tomo,
    Purity,
    Limited,
    InspectInverse,
    Conformance,
}

/// Global flags shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct CliOptions {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub dry_run: bool,
}

/// Execution context handed to the commands.
#[derive(Clone, Debug)]
pub struct RunContext {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub dry_run: bool,
}

fn resolve_out_dir(opts: &CliOptions, cfg: Option<&HarnessConfig>) -> PathBuf {
    if let Some(out) = &opts.out {
        return out.clone();
    }
    if let Some(cfg) = cfg {
        if let Some(dir) = &cfg.output_dir {
            return PathBuf::from(dir);
        }
    }
    if let Ok(dir) = std::env::var("XYTOMO_OUT") {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from("out")
}

fn thread_count(opts: &CliOptions) -> Option<usize> {
    opts.threads.or_else(|| {
        std::env::var("XYTOMO_THREADS").ok().and_then(|v| v.parse().ok())
    })
}

/// Run one subcommand. Returns the process exit code (0 on success; the
/// conformance command returns 2 when any check fails).
pub fn run(cmd: CommandKind, opts: &CliOptions) -> Result<i32> {
    let cfg = match &opts.config {
        Some(path) => Some(HarnessConfig::load(path)?),
        None => None,
    };
    let needs_config = !matches!(cmd, CommandKind::Conformance);
    if needs_config && cfg.is_none() {
        return Err(Error::Config("this command requires --config PATH".into()));
    }
    let seed = opts.seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(0);
    let ctx = RunContext {
        out_dir: resolve_out_dir(opts, cfg.as_ref()),
        seed,
        dry_run: opts.dry_run,
    };
    let body = || -> Result<i32> {
        match cmd {
            CommandKind::GenRho => {
                cmd_genrho(cfg.as_ref().unwrap(), &ctx)?;
                Ok(0)
            }
            CommandKind::Tomo => {
                cmd_tomo(cfg.as_ref().unwrap(), &ctx)?;
                Ok(0)
            }
            CommandKind::Purity => {
                cmd_purity(cfg.as_ref().unwrap(), &ctx)?;
                Ok(0)
            }
            CommandKind::Limited => {
                cmd_limited(cfg.as_ref().unwrap(), &ctx)?;
                Ok(0)
            }
            CommandKind::InspectInverse => {
                cmd_inspect_inverse(cfg.as_ref().unwrap(), &mut std::io::stdout())?;
                Ok(0)
            }
            CommandKind::Conformance => {
                let all_pass = cmd_conformance(cfg.as_ref(), &ctx)?;
                Ok(if all_pass { 0 } else { 2 })
            }
        }
    };
    match thread_count(opts) {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            pool.install(body)
        }
        None => body(),
    }
}
