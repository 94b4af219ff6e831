//! Monte-Carlo measurement pipeline: draw rotation times, simulate shot
//! outcomes, accumulate counts.
//!
//! Every unitary index gets its own counter-derived RNG stream, so results
//! depend only on `(drives, state, plan)` and never on execution order or
//! thread count.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::drive::{outcome_probabilities, DriveSet, RotationTimes};
use crate::error::{Error, Result};
use crate::qstate::{DensityMatrix, QubitCount};
use crate::stats::derive_seed;

/// Sampling budget for one experiment.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ExperimentPlan {
    pub n_unitaries: usize,
    pub shots_per_unitary: usize,
    /// Rotation times are drawn uniformly from `[0, window]`.
    pub window: f64,
    pub master_seed: u64,
}

impl ExperimentPlan {
    pub fn new(n_unitaries: usize, shots_per_unitary: usize, window: f64, master_seed: u64) -> Result<Self> {
        if n_unitaries < 2 {
            return Err(Error::TooFewUnitaries(n_unitaries));
        }
        if window.is_nan() || window <= 0.0 {
            return Err(Error::Config(format!("window must be positive (got {window})")));
        }
        Ok(ExperimentPlan { n_unitaries, shots_per_unitary, window, master_seed })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }
}

/// One sampled rotation-time vector with its observed bitstring counts.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub times: RotationTimes,
    pub counts: Vec<u32>,
}

impl MeasurementRecord {
    pub fn total_shots(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// Empirical outcome frequencies.
    pub fn frequencies(&self) -> Vec<f64> {
        let total = self.total_shots();
        if total == 0 {
            return vec![0.0; self.counts.len()];
        }
        self.counts.iter().map(|&c| f64::from(c) / f64::from(total)).collect()
    }
}

/// A full experiment: the plan plus one record per sampled unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct RunLog {
    pub n: QubitCount,
    pub plan: ExperimentPlan,
    pub records: Vec<MeasurementRecord>,
}

fn stream(master: u64, index: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive_seed(master, index))
}

/// Rotation times for unitary `index`, drawn from the stream derived from
/// `(master_seed, index)`.
pub fn draw_times(plan: &ExperimentPlan, index: usize, n: QubitCount) -> RotationTimes {
    let mut rng = stream(plan.master_seed, index as u64);
    draw_times_from(&mut rng, plan.window, n)
}

fn draw_times_from<R: Rng + ?Sized>(rng: &mut R, window: f64, n: QubitCount) -> RotationTimes {
    RotationTimes((0..n.get()).map(|_| rng.random::<f64>() * window).collect())
}

/// Multinomial sampling of `n_shots` outcomes by inverse-CDF over the
/// probability vector.
pub fn simulate_shots<R: Rng + ?Sized>(
    ds: &DriveSet,
    t: &RotationTimes,
    rho: &DensityMatrix,
    n_shots: usize,
    rng: &mut R,
) -> Result<MeasurementRecord> {
    let probs = outcome_probabilities(ds, t, rho)?;
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in &probs {
        acc += p;
        cdf.push(acc);
    }
    let mut counts = vec![0u32; probs.len()];
    for _ in 0..n_shots {
        let u: f64 = rng.random();
        let idx = cdf.partition_point(|&c| c < u).min(probs.len() - 1);
        counts[idx] += 1;
    }
    Ok(MeasurementRecord { times: t.clone(), counts })
}

/// Run the full plan. Unitary iterations execute in parallel; the log is
/// assembled in unitary order so the result is schedule-independent.
pub fn run_experiment(ds: &DriveSet, rho: &DensityMatrix, plan: &ExperimentPlan) -> Result<RunLog> {
    let n = ds.n();
    let records: Vec<MeasurementRecord> = (0..plan.n_unitaries)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(plan.master_seed, i as u64);
            let t = draw_times_from(&mut rng, plan.window, n);
            simulate_shots(ds, &t, rho, plan.shots_per_unitary, &mut rng)
        })
        .collect::<Result<_>>()?;
    Ok(RunLog { n, plan: *plan, records })
}

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Line-oriented text serialization: header `N N_U N_M T seed`, then one line
/// per record with the N times followed by the 2^N counts. Floats print in
/// shortest round-trip form, so write -> read -> write is byte-stable.
pub fn runlog_to_string(log: &RunLog) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {} {} {} {}",
        log.n.get(),
        log.plan.n_unitaries,
        log.plan.shots_per_unitary,
        fmt_f64(log.plan.window),
        log.plan.master_seed
    );
    for rec in &log.records {
        let mut parts: Vec<String> = rec.times.0.iter().map(|&t| fmt_f64(t)).collect();
        parts.extend(rec.counts.iter().map(|c| c.to_string()));
        let _ = writeln!(out, "{}", parts.join(" "));
    }
    out
}

pub fn save_runlog(log: &RunLog, path: &Path) -> Result<()> {
    std::fs::write(path, runlog_to_string(log))?;
    Ok(())
}

pub fn runlog_from_str(text: &str) -> Result<RunLog> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty log".into() })?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 5 {
        return Err(Error::Parse { line: 1, msg: format!("expected 5 header fields, got {}", toks.len()) });
    }
    let parse_err = |line: usize, msg: String| Error::Parse { line, msg };
    let n: usize = toks[0].parse().map_err(|e| parse_err(1, format!("{e}")))?;
    let n = QubitCount::new(n)?;
    let n_unitaries: usize = toks[1].parse().map_err(|e| parse_err(1, format!("{e}")))?;
    let shots: usize = toks[2].parse().map_err(|e| parse_err(1, format!("{e}")))?;
    let window: f64 = toks[3].parse().map_err(|e| parse_err(1, format!("{e}")))?;
    let seed: u64 = toks[4].parse().map_err(|e| parse_err(1, format!("{e}")))?;
    let plan = ExperimentPlan::new(n_unitaries, shots, window, seed)?;
    let dim = n.dim();
    let mut records = Vec::with_capacity(n_unitaries);
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != n.get() + dim {
            return Err(parse_err(
                lineno + 1,
                format!("expected {} fields, got {}", n.get() + dim, toks.len()),
            ));
        }
        let times: Vec<f64> = toks[..n.get()]
            .iter()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(lineno + 1, e.to_string()))?;
        let counts: Vec<u32> = toks[n.get()..]
            .iter()
            .map(|t| t.parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(lineno + 1, e.to_string()))?;
        records.push(MeasurementRecord { times: RotationTimes(times), counts });
    }
    if records.len() != n_unitaries {
        return Err(parse_err(0, format!("expected {} records, got {}", n_unitaries, records.len())));
    }
    Ok(RunLog { n, plan, records })
}

pub fn load_runlog(path: &Path) -> Result<RunLog> {
    runlog_from_str(&std::fs::read_to_string(path)?)
}
