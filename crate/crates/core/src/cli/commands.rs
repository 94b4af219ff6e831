//! The harness subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use super::config::{HarnessConfig, StateConfig};
use super::RunContext;
use crate::drive::DriveSet;
use crate::error::{Error, Result};
use crate::limited::{min_theta, min_theta_ladder_exact, FrequencySet};
use crate::purity::PurityVariance;
use crate::qstate::{self, DensityMatrix, QubitCount};
use crate::sampler::{run_experiment, ExperimentPlan};
use crate::stats::derive_seed;
use crate::tomography::{self, TomographyVariance, VarianceMode};

fn fmt(x: f64) -> String {
    format!("{x}")
}

/// CSV sink with a provenance comment header and a fixed column schema.
struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    fn new(cfg: &HarnessConfig, ctx: &RunContext, schema: &str, columns: &[&str]) -> Csv {
        let mut text = String::new();
        let _ = writeln!(
            text,
            "# xytomo v{} schema={schema} config_hash={:016x} seed={}",
            env!("CARGO_PKG_VERSION"),
            cfg.provenance_hash(),
            ctx.seed
        );
        let _ = writeln!(text, "{}", columns.join(","));
        Csv { text, columns: columns.len() }
    }

    fn row(&mut self, fields: &[String]) {
        debug_assert_eq!(fields.len(), self.columns);
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(name);
        std::fs::write(&path, &self.text)?;
        Ok(path)
    }
}

const METHODS: [&str; 3] = ["geometric", "uniform", "traced"];

struct Generated {
    rho: DensityMatrix,
    /// Documented purity: the target for the weighted generators, the
    /// expected value of the chosen ancilla count for the traced one.
    mu_documented: f64,
}

fn generate(
    method: &str,
    n: QubitCount,
    mu: f64,
    seed: u64,
) -> Result<Generated> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    match method {
        "geometric" => Ok(Generated { rho: qstate::gen_geometric(n, mu, &mut rng)?, mu_documented: mu }),
        "uniform" => Ok(Generated { rho: qstate::gen_uniform(n, mu, &mut rng)?, mu_documented: mu }),
        "traced" => {
            let (rho, mu_bar) = qstate::gen_traced(n, mu, &mut rng)?;
            Ok(Generated { rho, mu_documented: mu_bar })
        }
        other => Err(Error::Config(format!("unknown generator {other:?}"))),
    }
}

/// Generate the density-matrix ensembles and their manifest.
///
/// Writes one file per successful generation in the on-disk matrix format,
/// plus `manifest.csv` recording the achieved purity (or the reason a cell
/// was skipped: targets below the mixing floor of a method are unreachable).
pub fn cmd_genrho(cfg: &HarnessConfig, ctx: &RunContext) -> Result<()> {
    let g = cfg
        .genrho
        .as_ref()
        .ok_or_else(|| Error::Config("config has no [genrho] section".into()))?;
    let mut manifest = Csv::new(
        cfg,
        ctx,
        "genrho-v1",
        &["file", "n", "method", "mu_target", "mu_documented", "mu_achieved", "status"],
    );
    std::fs::create_dir_all(&ctx.out_dir)?;
    for &n_raw in &g.n_list {
        let n = QubitCount::new(n_raw)?;
        for (mu_idx, &mu) in g.mu_list.iter().enumerate() {
            for (m_idx, method) in METHODS.iter().enumerate() {
                for k in 0..g.per_cell {
                    let tag = (((n_raw * 64 + mu_idx) * 8 + m_idx) * 1024 + k) as u64;
                    let seed = derive_seed(ctx.seed, tag);
                    let name = format!(
                        "rho_n{n_raw}_mu{:04}_{method}_{k}.txt",
                        (mu * 1000.0).round() as u32
                    );
                    if ctx.dry_run {
                        manifest.row(&[
                            name,
                            n_raw.to_string(),
                            method.to_string(),
                            fmt(mu),
                            String::new(),
                            String::new(),
                            "dry-run".into(),
                        ]);
                        continue;
                    }
                    match generate(method, n, mu, seed) {
                        Ok(gen) => {
                            qstate::save_density_matrix(&gen.rho, &ctx.out_dir.join(&name))?;
                            manifest.row(&[
                                name,
                                n_raw.to_string(),
                                method.to_string(),
                                fmt(mu),
                                fmt(gen.mu_documented),
                                fmt(gen.rho.purity()),
                                "ok".into(),
                            ]);
                        }
                        Err(Error::UnreachablePurity { .. }) => {
                            manifest.row(&[
                                String::new(),
                                n_raw.to_string(),
                                method.to_string(),
                                fmt(mu),
                                String::new(),
                                String::new(),
                                "unreachable".into(),
                            ]);
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    }
    manifest.write(&ctx.out_dir, "manifest.csv")?;
    Ok(())
}

struct EnsembleEntry {
    id: usize,
    method: &'static str,
    mu_target: f64,
    rho: Option<DensityMatrix>,
    mu_true: f64,
}

/// Matrices for the sweep commands: `per_generator` per method, cycling
/// through the target-purity list, or a single fixed matrix when the config
/// pins a state source.
fn sweep_ensemble(
    state: Option<&StateConfig>,
    n: QubitCount,
    mu_list: &[f64],
    per_generator: usize,
    master_seed: u64,
) -> Result<Vec<EnsembleEntry>> {
    if let Some(state) = state {
        let rho = match state.source.as_str() {
            "file" => qstate::load_density_matrix(Path::new(state.path.as_ref().unwrap()))?,
            "generator" => {
                let gen = generate(
                    state.generator.as_ref().unwrap(),
                    n,
                    state.mu.unwrap(),
                    derive_seed(master_seed, 0x57A7E),
                )?;
                gen.rho
            }
            _ => unreachable!("validated"),
        };
        if rho.n() != n {
            return Err(Error::DimensionMismatch { expected: n.dim(), got: rho.dim() });
        }
        let mu_true = rho.purity();
        return Ok(vec![EnsembleEntry { id: 0, method: "fixed", mu_target: mu_true, rho: Some(rho), mu_true }]);
    }
    let mut out = Vec::new();
    let mut id = 0;
    for (m_idx, method) in METHODS.iter().enumerate() {
        for k in 0..per_generator {
            let mu = mu_list[k % mu_list.len()];
            let seed = derive_seed(master_seed, ((n.get() * 8 + m_idx) * 4096 + k) as u64);
            match generate(method, n, mu, seed) {
                Ok(gen) => {
                    let mu_true = gen.rho.purity();
                    out.push(EnsembleEntry { id, method, mu_target: mu, rho: Some(gen.rho), mu_true });
                }
                Err(Error::UnreachablePurity { .. }) => {
                    out.push(EnsembleEntry { id, method, mu_target: mu, rho: None, mu_true: f64::NAN });
                }
                Err(e) => return Err(e),
            }
            id += 1;
        }
    }
    Ok(out)
}

/// Tomography variance sweep: per matrix, repeat reconstructions at two shot
/// budgets, then separate the per-unitary and per-shot components by the
/// two-point regression in `1/N_M`.
pub fn cmd_tomo(cfg: &HarnessConfig, ctx: &RunContext) -> Result<()> {
    let t = cfg
        .tomo
        .as_ref()
        .ok_or_else(|| Error::Config("config has no [tomo] section".into()))?;
    let mut trials_csv = Csv::new(
        cfg,
        ctx,
        "tomo-trials-v1",
        &[
            "matrix", "method", "mu_true", "trial", "n", "n_u", "n_m", "t_window",
            "delta_tom_sq_empirical", "delta_tom_sq_predicted",
        ],
    );
    let mut summary = Csv::new(
        cfg,
        ctx,
        "tomo-summary-v1",
        &[
            "matrix", "method", "n", "mu_target", "mu_true", "du_sq_empirical",
            "dm_sq_empirical", "du_sq_amortized", "dm_sq_predicted", "status",
        ],
    );
    if ctx.dry_run {
        trials_csv.write(&ctx.out_dir, "tomo_trials.csv")?;
        summary.write(&ctx.out_dir, "tomo_summary.csv")?;
        return Ok(());
    }
    for &n_raw in &t.n_list {
        let n = QubitCount::new(n_raw)?;
        let ds = cfg.drive.build(n_raw)?;
        let ensemble = sweep_ensemble(
            cfg.state.as_ref(),
            n,
            &t.mu_list,
            t.matrices_per_generator,
            derive_seed(ctx.seed, 0xE0 + n_raw as u64),
        )?;
        let shots = [t.shots_low, t.shots_high];
        for entry in &ensemble {
            let Some(rho) = &entry.rho else {
                summary.row(&[
                    entry.id.to_string(),
                    entry.method.to_string(),
                    n_raw.to_string(),
                    fmt(entry.mu_target),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    "unreachable".into(),
                ]);
                continue;
            };
            let var_pred = TomographyVariance::predict(&ds, entry.mu_true, VarianceMode::Amortized);
            // (setting, trial) -> squared error
            let cells: Vec<(usize, usize, f64)> = (0..2usize)
                .flat_map(|s| (0..t.trials).map(move |tr| (s, tr)))
                .collect::<Vec<_>>()
                .into_par_iter()
                .map(|(s, tr)| {
                    let seed = derive_seed(
                        ctx.seed,
                        0xB000_0000 + ((entry.id * 2 + s) * t.trials + tr) as u64
                            + ((n_raw as u64) << 40),
                    );
                    let plan = ExperimentPlan::new(t.n_unitaries, shots[s], t.window, seed)?;
                    let log = run_experiment(&ds, rho, &plan)?;
                    let est = tomography::reconstruct(&ds, &log)?;
                    Ok((s, tr, est.squared_error(rho)))
                })
                .collect::<Result<_>>()?;
            let mut mean_sq = [0.0f64; 2];
            for &(s, tr, sq) in &cells {
                mean_sq[s] += sq / t.trials as f64;
                trials_csv.row(&[
                    entry.id.to_string(),
                    entry.method.to_string(),
                    fmt(entry.mu_true),
                    tr.to_string(),
                    n_raw.to_string(),
                    t.n_unitaries.to_string(),
                    shots[s].to_string(),
                    fmt(t.window),
                    fmt(sq),
                    fmt(var_pred.total(t.n_unitaries, shots[s])),
                ]);
            }
            // V * N_U = A + B / N_M at the two shot budgets
            let nu = t.n_unitaries as f64;
            let inv = [1.0 / shots[0] as f64, 1.0 / shots[1] as f64];
            let b = (mean_sq[0] * nu - mean_sq[1] * nu) / (inv[0] - inv[1]);
            let a = mean_sq[1] * nu - b * inv[1];
            summary.row(&[
                entry.id.to_string(),
                entry.method.to_string(),
                n_raw.to_string(),
                fmt(entry.mu_target),
                fmt(entry.mu_true),
                fmt(a),
                fmt(b),
                fmt(var_pred.delta_u_sq),
                fmt(var_pred.delta_m_sq),
                "ok".into(),
            ]);
        }
    }
    trials_csv.write(&ctx.out_dir, "tomo_trials.csv")?;
    summary.write(&ctx.out_dir, "tomo_summary.csv")?;
    Ok(())
}

/// Purity variance sweep: per matrix, repeat pair-estimator runs; the summary
/// compares the empirical estimator variance against the predicted total.
pub fn cmd_purity(cfg: &HarnessConfig, ctx: &RunContext) -> Result<()> {
    let p = cfg
        .purity
        .as_ref()
        .ok_or_else(|| Error::Config("config has no [purity] section".into()))?;
    let mut trials_csv = Csv::new(
        cfg,
        ctx,
        "purity-trials-v1",
        &["matrix", "method", "trial", "n", "n_u", "n_m", "t_window", "mu_true", "mu_hat", "predicted_sigma"],
    );
    let mut summary = Csv::new(
        cfg,
        ctx,
        "purity-summary-v1",
        &[
            "matrix", "method", "n", "mu_target", "mu_true", "mu_hat_mean", "mu_hat_se",
            "var_empirical", "var_predicted", "status",
        ],
    );
    if ctx.dry_run {
        trials_csv.write(&ctx.out_dir, "purity_trials.csv")?;
        summary.write(&ctx.out_dir, "purity_summary.csv")?;
        return Ok(());
    }
    for &n_raw in &p.n_list {
        let n = QubitCount::new(n_raw)?;
        let ds = cfg.drive.build(n_raw)?;
        let ensemble = sweep_ensemble(
            cfg.state.as_ref(),
            n,
            &p.mu_list,
            p.matrices_per_generator,
            derive_seed(ctx.seed, 0xF0 + n_raw as u64),
        )?;
        for entry in &ensemble {
            let Some(rho) = &entry.rho else {
                summary.row(&[
                    entry.id.to_string(),
                    entry.method.to_string(),
                    n_raw.to_string(),
                    fmt(entry.mu_target),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    "unreachable".into(),
                ]);
                continue;
            };
            let var_pred = PurityVariance::amortized(&ds, entry.mu_true)
                .total(p.n_unitaries, p.shots_per_unitary);
            let sigma_pred = var_pred.sqrt();
            let mus: Vec<f64> = (0..p.trials)
                .into_par_iter()
                .map(|tr| {
                    let seed = derive_seed(
                        ctx.seed,
                        0xD000_0000 + (entry.id * p.trials + tr) as u64 + ((n_raw as u64) << 40),
                    );
                    let plan =
                        ExperimentPlan::new(p.n_unitaries, p.shots_per_unitary, p.window, seed)?;
                    let log = run_experiment(&ds, rho, &plan)?;
                    Ok(crate::purity::estimate_purity(&ds, &log)?.mu_hat)
                })
                .collect::<Result<_>>()?;
            for (tr, &mu_hat) in mus.iter().enumerate() {
                trials_csv.row(&[
                    entry.id.to_string(),
                    entry.method.to_string(),
                    tr.to_string(),
                    n_raw.to_string(),
                    p.n_unitaries.to_string(),
                    p.shots_per_unitary.to_string(),
                    fmt(p.window),
                    fmt(entry.mu_true),
                    fmt(mu_hat),
                    fmt(sigma_pred),
                ]);
            }
            summary.row(&[
                entry.id.to_string(),
                entry.method.to_string(),
                n_raw.to_string(),
                fmt(entry.mu_target),
                fmt(entry.mu_true),
                fmt(crate::stats::mean(&mus)),
                fmt(crate::stats::standard_error(&mus)),
                fmt(crate::stats::variance(&mus)),
                fmt(var_pred),
                "ok".into(),
            ]);
        }
    }
    trials_csv.write(&ctx.out_dir, "purity_trials.csv")?;
    summary.write(&ctx.out_dir, "purity_summary.csv")?;
    Ok(())
}

/// Smallest-frequency-combination sweep for the limited-control protocol:
/// the exponential ladder (exact, rational arithmetic) and random frequency
/// sets, with per-N logarithmic statistics.
pub fn cmd_limited(cfg: &HarnessConfig, ctx: &RunContext) -> Result<()> {
    let l = cfg
        .limited
        .as_ref()
        .ok_or_else(|| Error::Config("config has no [limited] section".into()))?;
    let mut csv = Csv::new(
        cfg,
        ctx,
        "limited-v1",
        &["mode", "n", "seed", "min_theta", "argmin", "log_mean", "log_sigma"],
    );
    if ctx.dry_run {
        csv.write(&ctx.out_dir, "limited.csv")?;
        return Ok(());
    }
    for mode in &l.modes {
        match mode.as_str() {
            "ladder" => {
                for n in l.n_min..=l.n_max {
                    let (val, coeffs) = min_theta_ladder_exact(n, l.base);
                    let theta = l.lambda0 * (*val.numer() as f64) / (*val.denom() as f64);
                    csv.row(&[
                        "ladder".into(),
                        n.to_string(),
                        "0".into(),
                        fmt(theta),
                        coeff_string(&coeffs),
                        fmt(theta.ln()),
                        "0".into(),
                    ]);
                }
            }
            "random" => {
                for n in l.n_min..=l.n_max {
                    let results: Vec<(usize, f64, Vec<i8>)> = (0..l.seeds)
                        .into_par_iter()
                        .map(|s| {
                            let seed = derive_seed(ctx.seed, 0xA000 + (n * 100_000 + s) as u64);
                            let fs = if l.offset == 0.0 {
                                FrequencySet::uniform_random(n, l.lambda0, seed)
                            } else {
                                FrequencySet::uniform_random_offset(n, l.lambda0, l.offset, seed)
                            };
                            match min_theta(&fs) {
                                Ok(mt) => Ok((s, mt.value, mt.argmin.coeffs)),
                                Err(Error::DegenerateFrequencies(c)) => Ok((s, 0.0, c)),
                                Err(e) => Err(e),
                            }
                        })
                        .collect::<Result<_>>()?;
                    let logs: Vec<f64> = results
                        .iter()
                        .filter(|r| r.1 > 0.0)
                        .map(|r| r.1.ln())
                        .collect();
                    let log_mean = crate::stats::mean(&logs);
                    let log_sigma = crate::stats::variance(&logs).sqrt();
                    for (s, value, coeffs) in &results {
                        csv.row(&[
                            "random".into(),
                            n.to_string(),
                            s.to_string(),
                            fmt(*value),
                            coeff_string(coeffs),
                            fmt(log_mean),
                            fmt(log_sigma),
                        ]);
                    }
                }
            }
            _ => unreachable!("validated"),
        }
    }
    csv.write(&ctx.out_dir, "limited.csv")?;
    Ok(())
}

fn coeff_string(coeffs: &[i8]) -> String {
    coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";")
}

/// Print the per-qubit inverse-map factor tables for the configured drives.
pub fn cmd_inspect_inverse(cfg: &HarnessConfig, out: &mut dyn std::io::Write) -> Result<()> {
    let n = inspect_qubit_count(cfg)?;
    let ds: DriveSet = cfg.drive.build(n)?;
    writeln!(out, "inverse-map factors, {} qubit(s)", n)?;
    for (q, d) in ds.iter().enumerate() {
        writeln!(
            out,
            "qubit {q}: g={} nu={} phi={} lambda={} S={}",
            d.g(),
            d.nu(),
            d.phi(),
            d.lambda(),
            d.s_param()
        )?;
        writeln!(out, "  (a,b,s)      k=-1                    k=0                     k=+1")?;
        for (a, an) in [(1i8, "u"), (-1, "d")] {
            for (b, bn) in [(1i8, "u"), (-1, "d")] {
                for (s, sn) in [(1i8, "u"), (-1, "d")] {
                    let f = crate::recon::minv_factor(d, a, b, s);
                    writeln!(
                        out,
                        "  ({an},{bn},{sn})  {:>22}  {:>22}  {:>22}",
                        fmt_c(f.coeff(-1)),
                        fmt_c(f.coeff(0)),
                        fmt_c(f.coeff(1)),
                    )?;
                }
            }
        }
    }
    Ok(())
}

fn inspect_qubit_count(cfg: &HarnessConfig) -> Result<usize> {
    if !cfg.drive.sweet_spot {
        if let Some(g) = &cfg.drive.g {
            return Ok(g.len());
        }
    }
    if let Some(t) = &cfg.tomo {
        return Ok(t.n_list[0]);
    }
    if let Some(p) = &cfg.purity {
        return Ok(p.n_list[0]);
    }
    if let Some(g) = &cfg.genrho {
        return Ok(g.n_list[0]);
    }
    Ok(1)
}

fn fmt_c(z: num_complex::Complex64) -> String {
    format!("{:+.6}{:+.6}i", z.re, z.im)
}

/// Run the oracle conformance suite and write one record per check. Returns
/// whether every check passed.
pub fn cmd_conformance(cfg: Option<&HarnessConfig>, ctx: &RunContext) -> Result<bool> {
    let reports = crate::oracle::run_conformance(ctx.seed)?;
    let mut text = String::new();
    let hash = cfg.map(|c| c.provenance_hash()).unwrap_or(0);
    let _ = writeln!(
        text,
        "# xytomo v{} schema=conformance-v1 config_hash={hash:016x} seed={}",
        env!("CARGO_PKG_VERSION"),
        ctx.seed
    );
    let _ = writeln!(text, "name,primary,oracle,abs_err,rel_err,tolerance,pass");
    let mut all = true;
    for r in &reports {
        all &= r.pass;
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{}",
            r.name,
            fmt(r.primary),
            fmt(r.oracle),
            fmt(r.abs_err),
            fmt(r.rel_err),
            fmt(r.tolerance),
            r.pass
        );
        println!(
            "{} {}: primary={:.6e} oracle={:.6e} |err|={:.3e} tol={:.3e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.primary,
            r.oracle,
            r.abs_err,
            r.tolerance
        );
    }
    std::fs::create_dir_all(&ctx.out_dir)?;
    std::fs::write(ctx.out_dir.join("conformance.csv"), text)?;
    Ok(all)
}
