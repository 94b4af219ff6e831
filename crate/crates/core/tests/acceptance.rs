//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers. Run with `cargo test --test acceptance -- --nocapture`
//! to see the report.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use xytomo::drive::{DriveSet, QubitDrive};
use xytomo::limited::{self, FrequencySet};
use xytomo::purity::estimate_purity;
use xytomo::qstate::{self, BasisIndex, DensityMatrix, QubitCount};
use xytomo::recon::{self, AveragingWindow};
use xytomo::sampler::{run_experiment, ExperimentPlan};
use xytomo::stats;
use xytomo::tomography::{self, reconstruct, reconstruct_analytic};

const MASTER_SEED: u64 = 0x5EED_2026;

fn sweet(n: usize) -> DriveSet {
    DriveSet::sweet_spot(QubitCount::new(n).unwrap())
}

fn generic_drives(n: usize, salt: u64) -> DriveSet {
    use rand::Rng;
    let mut rng = ChaCha12Rng::seed_from_u64(stats::derive_seed(MASTER_SEED, salt));
    let drives = (0..n)
        .map(|_| {
            let g = 0.4 + 2.0 * rng.random::<f64>();
            let nu = (0.3 + 1.5 * rng.random::<f64>()) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            let phi = 6.0 * rng.random::<f64>() - 3.0;
            QubitDrive::new(g, nu, phi).unwrap()
        })
        .collect();
    DriveSet::new(drives).unwrap()
}

/// Criterion 1: analytic infinite-window averaging inverts exactly
/// (delta-delta to 1e-12; N <= 2 exhaustive, N = 3 on 10^4 random tuples),
/// and the analytic reconstruction returns the state entrywise to 1e-10.
#[test]
fn acceptance_01_exact_inversion() {
    use rand::Rng;
    let mut worst = 0.0f64;
    for n in [1usize, 2] {
        let mut sets = vec![sweet(n)];
        sets.extend((0..5).map(|k| generic_drives(n, 16 * n as u64 + k)));
        for ds in sets {
            let dim = 1usize << n;
            for a in 0..dim {
                for b in 0..dim {
                    for i in 0..dim {
                        for j in 0..dim {
                            let v = recon::i_tensor_avg(
                                &ds,
                                AveragingWindow::Infinite,
                                BasisIndex(a),
                                BasisIndex(b),
                                BasisIndex(i),
                                BasisIndex(j),
                            );
                            let expect = if a == i && b == j { 1.0 } else { 0.0 };
                            worst = worst.max((v - Complex64::new(expect, 0.0)).norm());
                        }
                    }
                }
            }
        }
    }
    let mut rng = ChaCha12Rng::seed_from_u64(stats::derive_seed(MASTER_SEED, 0x11));
    for salt in 0..5u64 {
        let ds3 = generic_drives(3, 48 + salt);
        for _ in 0..2_000 {
            let pick = |rng: &mut ChaCha12Rng| rng.random::<u32>() as usize % 8;
            let (a, b, i, j) = (pick(&mut rng), pick(&mut rng), pick(&mut rng), pick(&mut rng));
            let v = recon::i_tensor_avg(
                &ds3,
                AveragingWindow::Infinite,
                BasisIndex(a),
                BasisIndex(b),
                BasisIndex(i),
                BasisIndex(j),
            );
            let expect = if a == i && b == j { 1.0 } else { 0.0 };
            worst = worst.max((v - Complex64::new(expect, 0.0)).norm());
        }
    }
    assert!(worst < 1e-12, "inversion deviation {worst}");

    let mut worst_recon = 0.0f64;
    for n in [2usize, 3] {
        let nq = QubitCount::new(n).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(stats::derive_seed(MASTER_SEED, 0x12 + n as u64));
        for mu in [0.3, 0.6] {
            let rho = qstate::gen_uniform(nq, mu, &mut rng).unwrap();
            let est = reconstruct_analytic(&sweet(n), &rho, AveragingWindow::Infinite);
            for (x, y) in est.rho_hat.iter().zip(rho.entries().iter()) {
                worst_recon = worst_recon.max((x - y).norm());
            }
        }
    }
    assert!(worst_recon < 1e-10, "analytic reconstruction deviation {worst_recon}");
    println!(
        "ACCEPTANCE 1 (exact inversion): PASS — max tensor deviation {worst:.2e}, max reconstruction deviation {worst_recon:.2e}"
    );
}

/// Criterion 2: the shot-noise factor equals 5^N exactly at the sweet spot;
/// the N = 1 value 5 is confirmed by the averaged triple-composition
/// contraction and by Monte-Carlo shot-noise sampling within 3 sigma.
#[test]
fn acceptance_02_delta_m_formula() {
    for n in 1..=6usize {
        let predicted = tomography::predict_delta_m(&sweet(n));
        let expect = 5.0f64.powi(n as i32);
        assert!(
            (predicted - expect).abs() < 1e-12 * expect,
            "predict_delta_m({n}) = {predicted}"
        );
    }
    // contraction oracle at N = 1
    let ds1 = sweet(1);
    let mut contraction = 0.0;
    for i in 0..2usize {
        let mut acc = Complex64::ZERO;
        for x in 0..2usize {
            for y in 0..2usize {
                acc += recon::j_tensor_avg(
                    &ds1,
                    AveragingWindow::Infinite,
                    BasisIndex(x),
                    BasisIndex(y),
                    BasisIndex(y),
                    BasisIndex(x),
                    BasisIndex(i),
                    BasisIndex(i),
                )
                .unwrap();
            }
        }
        assert!(acc.im.abs() < 1e-12);
        contraction = acc.re;
        assert!((acc.re - 5.0).abs() < 1e-12, "contraction {acc}");
    }
    // Monte-Carlo shot-noise weight, 500 trials
    let n1 = QubitCount::new(1).unwrap();
    let rho = DensityMatrix::maximally_mixed(n1);
    let (mean, se) = xytomo::oracle::shot_noise_weight_mc(
        &ds1,
        &rho,
        500,
        10,
        1e4,
        stats::derive_seed(MASTER_SEED, 0x21),
    )
    .unwrap();
    assert!(
        (mean - 5.0).abs() < 3.0 * se + 5e-3,
        "MC weight {mean} +- {se} vs 5"
    );
    println!(
        "ACCEPTANCE 2 (delta_M formula): PASS — 5^N exact, contraction {contraction:.12}, MC {mean:.4} +- {se:.4}"
    );
}

struct TomoCheck {
    dm_ratio: f64,
    du_ratio: f64,
}

fn tomo_matrix_check(
    ds: &DriveSet,
    rho: &DensityMatrix,
    n_u: usize,
    shots: [usize; 2],
    trials: usize,
    seed: u64,
) -> TomoCheck {
    let window = 1e5;
    let mean_sq: Vec<f64> = (0..2usize)
        .map(|s| {
            let total: f64 = (0..trials)
                .into_par_iter()
                .map(|tr| {
                    let plan = ExperimentPlan::new(
                        n_u,
                        shots[s],
                        window,
                        stats::derive_seed(seed, (s * trials + tr) as u64),
                    )
                    .unwrap();
                    let log = run_experiment(ds, rho, &plan).unwrap();
                    reconstruct(ds, &log).unwrap().squared_error(rho)
                })
                .sum();
            total / trials as f64
        })
        .collect();
    let nu = n_u as f64;
    let inv = [1.0 / shots[0] as f64, 1.0 / shots[1] as f64];
    let dm_emp = (mean_sq[0] * nu - mean_sq[1] * nu) / (inv[0] - inv[1]);
    let du_emp = mean_sq[1] * nu - dm_emp * inv[1];
    let mu = rho.purity();
    let dm_pred = tomography::predict_delta_m(ds);
    // the criterion compares against the bare (5/2)^N mu line
    let du_pred = 2.5f64.powi(ds.n().get() as i32) * mu;
    TomoCheck { dm_ratio: dm_emp / dm_pred, du_ratio: du_emp / du_pred }
}

/// Criterion 3: variance-scaling reproduction at N = 3, 4 over 30 random
/// matrices each (10 per generator): the empirical shot-noise component is
/// within a factor 2 of 5^N and the empirical per-unitary component within a
/// factor 3 of (5/2)^N mu, each for at least 90% of the matrices.
///
/// Target purities span 0.3..0.69, the regime where the ensemble-averaged
/// per-unitary estimate is sharp. Toward the mixed limit the exact
/// per-unitary variance vanishes (it is identically zero for the maximally
/// mixed state), so there the amortized value is an upper envelope rather
/// than a factor-3 prediction.
#[test]
fn acceptance_03_variance_scaling_ensembles() {
    let mu_targets = [0.3, 0.4, 0.5, 0.6, 0.69];
    let mut lines = Vec::new();
    for n in [3usize, 4] {
        let nq = QubitCount::new(n).unwrap();
        let ds = sweet(n);
        let mut checks = Vec::new();
        let mut matrix_idx = 0u64;
        for method in 0..3usize {
            for k in 0..10usize {
                let mu = mu_targets[k % mu_targets.len()];
                let mut rng = ChaCha12Rng::seed_from_u64(stats::derive_seed(
                    MASTER_SEED,
                    0x3000 + (n as u64) * 256 + matrix_idx,
                ));
                let rho = match method {
                    0 => qstate::gen_geometric(nq, mu, &mut rng).unwrap(),
                    1 => qstate::gen_uniform(nq, mu, &mut rng).unwrap(),
                    _ => qstate::gen_traced(nq, mu, &mut rng).unwrap().0,
                };
                checks.push(tomo_matrix_check(
                    &ds,
                    &rho,
                    48,
                    [4, 64],
                    128,
                    stats::derive_seed(MASTER_SEED, 0x3100 + (n as u64) * 1024 + matrix_idx),
                ));
                matrix_idx += 1;
            }
        }
        let dm_pass = checks.iter().filter(|c| c.dm_ratio > 0.5 && c.dm_ratio < 2.0).count();
        let du_pass = checks.iter().filter(|c| c.du_ratio > 1.0 / 3.0 && c.du_ratio < 3.0).count();
        let total = checks.len();
        assert!(
            dm_pass as f64 >= 0.9 * total as f64,
            "N={n}: only {dm_pass}/{total} matrices within factor 2 of 5^N"
        );
        assert!(
            du_pass as f64 >= 0.9 * total as f64,
            "N={n}: only {du_pass}/{total} matrices within factor 3 of (5/2)^N mu"
        );
        lines.push(format!(
            "N={n}: dM within x2 for {dm_pass}/{total}, dU within x3 for {du_pass}/{total}"
        ));
    }
    println!("ACCEPTANCE 3 (variance scaling ensembles): PASS — {}", lines.join("; "));
}

/// Criterion 4: the pair estimator is unbiased — over 500 runs the ensemble
/// mean of mu_hat is within 3 standard errors of the true purity, for
/// N in {2, 3} and mu in {0.25, 0.5, 1.0}.
#[test]
fn acceptance_04_purity_unbiasedness() {
    let mut lines = Vec::new();
    for n in [2usize, 3] {
        let nq = QubitCount::new(n).unwrap();
        let ds = sweet(n);
        for (mi, &mu) in [0.25f64, 0.5, 1.0].iter().enumerate() {
            let mut rng = ChaCha12Rng::seed_from_u64(stats::derive_seed(
                MASTER_SEED,
                0x4000 + (n as u64) * 16 + mi as u64,
            ));
            let rho = if (mu - 1.0).abs() < 1e-12 {
                DensityMatrix::from_pure(&qstate::haar_state(nq, &mut rng))
            } else {
                qstate::gen_uniform(nq, mu, &mut rng).unwrap()
            };
            let mu_true = rho.purity();
            let trials = 500;
            let mus: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|tr| {
                    let plan = ExperimentPlan::new(
                        300,
                        10,
                        1e5,
                        stats::derive_seed(MASTER_SEED, 0x4100 + (n as u64) * 100_000 + (mi * 1000 + tr) as u64),
                    )
                    .unwrap();
                    let log = run_experiment(&ds, &rho, &plan).unwrap();
                    estimate_purity(&ds, &log).unwrap().mu_hat
                })
                .collect();
            let mean = stats::mean(&mus);
            let se = stats::standard_error(&mus);
            assert!(
                (mean - mu_true).abs() < 3.0 * se,
                "N={n} mu={mu}: mean {mean} vs true {mu_true} (se {se})"
            );
            lines.push(format!("N={n} mu={mu_true:.3}: {mean:.4}+-{se:.4}"));
        }
    }
    println!("ACCEPTANCE 4 (purity unbiasedness): PASS — {}", lines.join("; "));
}

/// Criterion 5: at fixed budget and sweet spot, the variance of the pair
/// estimator grows with qubit number at the rate of the dominant shot-pair
/// component: the fitted log-slope over N = 2..5 equals ln 7 within 15%.
#[test]
fn acceptance_05_sqrt7_scaling() {
    let n_u = 10;
    let n_m = 2;
    let trials = 2500usize;
    let ns = [2usize, 3, 4, 5];
    let mut vars = Vec::new();
    for (ni, &n) in ns.iter().enumerate() {
        let nq = QubitCount::new(n).unwrap();
        let ds = sweet(n);
        let rho = DensityMatrix::maximally_mixed(nq);
        let mus: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|tr| {
                let plan = ExperimentPlan::new(
                    n_u,
                    n_m,
                    1e5,
                    stats::derive_seed(MASTER_SEED, 0x5000 + (ni * trials + tr) as u64),
                )
                .unwrap();
                let log = run_experiment(&ds, &rho, &plan).unwrap();
                estimate_purity(&ds, &log).unwrap().mu_hat
            })
            .collect();
        vars.push(stats::variance(&mus));
    }
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let lys: Vec<f64> = vars.iter().map(|v| v.ln()).collect();
    let slope = stats::linear_slope(&xs, &lys);
    let target = 7.0f64.ln();
    assert!(
        (slope - target).abs() < 0.15 * target,
        "fitted slope {slope} vs ln 7 = {target}"
    );
    println!(
        "ACCEPTANCE 5 (sqrt-7 budget scaling): PASS — fitted slope {slope:.4} vs ln 7 = {target:.4} ({:+.1}%)",
        100.0 * (slope - target) / target
    );
}

/// Criterion 6: the systematic reconstruction error decays as 1/T in the
/// averaging window, slope -1 +- 0.1 on log-log, for both the per-qubit-time
/// and the single-time protocols at N = 2.
#[test]
fn acceptance_06_finite_window_bias() {
    let nq = QubitCount::new(2).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(stats::derive_seed(MASTER_SEED, 0x60));
    let rho = qstate::gen_uniform(nq, 0.5, &mut rng).unwrap();

    // per-qubit-time mode, distinct Rabi frequencies
    let ds = DriveSet::sweet_spot_with_lambdas(&[1.0, 1.37]).unwrap();
    let ts: Vec<f64> = (0..24).map(|k| 10.0 * 1.35f64.powi(k)).collect();
    let errs: Vec<f64> = ts
        .iter()
        .map(|&t| tomography::systematic_bias_perqubit(&ds, &rho, t))
        .collect();
    let slope_pq = stats::log_log_slope(&ts, &errs);
    assert!((slope_pq + 1.0).abs() < 0.1, "per-qubit slope {slope_pq}");

    // single-time mode on the base-3 ladder
    let fs = FrequencySet::ladder(2, 3, 1.0);
    let ds_single = fs.drives().unwrap();
    let theta_min = limited::min_theta(&fs).unwrap().value;
    let ts2: Vec<f64> = (0..24).map(|k| 30.0 / theta_min * 1.35f64.powi(k)).collect();
    let errs2: Vec<f64> = ts2
        .iter()
        .map(|&t| limited::systematic_bias(&ds_single, t, &rho).unwrap())
        .collect();
    let slope_st = stats::log_log_slope(&ts2, &errs2);
    assert!((slope_st + 1.0).abs() < 0.1, "single-time slope {slope_st}");
    println!(
        "ACCEPTANCE 6 (finite-window bias): PASS — per-qubit slope {slope_pq:.3}, single-time slope {slope_st:.3}"
    );
}

/// Criterion 7: the ladder minimum is exactly lambda0 3^-(N-1) (rational
/// arithmetic, N <= 8), and random frequency sets decay with fitted base
/// 4.6 +- 0.5 over 200 seeds and N = 2..8.
#[test]
fn acceptance_07_min_theta() {
    use num_rational::Ratio;
    for n in 1..=8usize {
        let (val, _) = limited::min_theta_ladder_exact(n, 3);
        assert_eq!(val, Ratio::new(1i128, 3i128.pow(n as u32 - 1)), "ladder N={n}");
    }
    let ns: Vec<usize> = (2..=8).collect();
    let log_means: Vec<f64> = ns
        .par_iter()
        .map(|&n| {
            let logs: Vec<f64> = (0..200u64)
                .map(|seed| {
                    let fs = FrequencySet::uniform_random(
                        n,
                        1.0,
                        stats::derive_seed(MASTER_SEED, 0x7000 + n as u64 * 1000 + seed),
                    );
                    limited::min_theta(&fs).unwrap().value.ln()
                })
                .collect();
            stats::mean(&logs)
        })
        .collect();
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let slope = stats::linear_slope(&xs, &log_means);
    let base = (-slope).exp();
    assert!(
        (base - 4.6).abs() < 0.5,
        "fitted random decay base {base} outside 4.6 +- 0.5"
    );
    println!(
        "ACCEPTANCE 7 (min-theta): PASS — ladder exact 3^-(N-1) for N<=8, random decay base {base:.3}"
    );
}

/// Criterion 8: the three generators produce valid matrices with purity
/// within 0.02 of the target (weighted mixtures) or of the documented
/// expectation (partial trace, checked on the ensemble mean), across
/// N in 2..5 and mu in {0.1, 0.2, 0.3, 0.5}; infeasible cells error out
/// exactly when the target is below the method's mixing floor.
#[test]
fn acceptance_08_generators() {
    let mut cells = 0usize;
    let mut unreachable = 0usize;
    for n in 2..=5usize {
        let nq = QubitCount::new(n).unwrap();
        let dim = nq.dim() as f64;
        for (mi, &mu) in [0.1f64, 0.2, 0.3, 0.5].iter().enumerate() {
            let mut rng = ChaCha12Rng::seed_from_u64(stats::derive_seed(
                MASTER_SEED,
                0x8000 + (n * 16 + mi) as u64,
            ));
            // geometric: feasible above 1/min(2^N, 30)
            let geo_floor = 1.0 / (nq.dim().min(30)) as f64;
            match qstate::gen_geometric(nq, mu, &mut rng) {
                Ok(rho) => {
                    assert!(mu > geo_floor);
                    DensityMatrix::new(nq, rho.entries().clone()).unwrap();
                    assert!((rho.purity() - mu).abs() < 0.02, "geometric N={n} mu={mu}");
                }
                Err(xytomo::Error::UnreachablePurity { .. }) => {
                    assert!(mu <= geo_floor + 1e-12, "geometric N={n} mu={mu} wrongly unreachable");
                    unreachable += 1;
                }
                Err(e) => panic!("geometric N={n} mu={mu}: {e}"),
            }
            // uniform: feasible when ceil(1/mu) fits in the Hilbert space
            let feasible_uniform = (1.0 / mu).ceil() as usize <= nq.dim();
            match qstate::gen_uniform(nq, mu, &mut rng) {
                Ok(rho) => {
                    assert!(feasible_uniform);
                    DensityMatrix::new(nq, rho.entries().clone()).unwrap();
                    assert!((rho.purity() - mu).abs() < 0.02, "uniform N={n} mu={mu}");
                }
                Err(xytomo::Error::UnreachablePurity { .. }) => {
                    assert!(!feasible_uniform || mu < 1.0 / dim, "uniform N={n} mu={mu}");
                    unreachable += 1;
                }
                Err(e) => panic!("uniform N={n} mu={mu}: {e}"),
            }
            // traced: always generates; the documented expectation is checked
            // on the ensemble mean
            let draws = 160;
            let mut acc = 0.0;
            let mut documented = 0.0;
            for _ in 0..draws {
                let (rho, mu_bar) = qstate::gen_traced(nq, mu, &mut rng).unwrap();
                DensityMatrix::new(nq, rho.entries().clone()).unwrap();
                acc += rho.purity();
                documented = mu_bar;
            }
            let mean = acc / draws as f64;
            assert!(
                (mean - documented).abs() < 0.02,
                "traced N={n} mu={mu}: ensemble mean {mean} vs documented {documented}"
            );
            cells += 1;
        }
    }
    println!(
        "ACCEPTANCE 8 (generators): PASS — {cells} cells checked, {unreachable} analytically infeasible cells rejected"
    );
}

/// Criterion 9: every command is byte-stable under re-runs with a fixed seed,
/// independent of thread count.
#[test]
fn acceptance_09_determinism() {
    use xytomo::cli::{run, CliOptions, CommandKind};
    let base = std::env::temp_dir().join(format!("xytomo_accept9_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&base);
    std::fs::create_dir_all(&base).unwrap();
    let config_path = base.join("config.toml");
    std::fs::write(
        &config_path,
        r#"
schema_version = 1
seed = 91

[drive]
sweet_spot = true

[genrho]
n_list = [2]
mu_list = [0.3, 0.5]
per_cell = 2

[tomo]
n_list = [2]
mu_list = [0.4]
matrices_per_generator = 2
n_unitaries = 12
shots_low = 2
shots_high = 16
trials = 4
window = 1e4

[purity]
n_list = [2]
mu_list = [0.4]
matrices_per_generator = 2
n_unitaries = 12
shots_per_unitary = 3
trials = 6
window = 1e4

[limited]
modes = ["ladder", "random"]
n_min = 2
n_max = 5
seeds = 12
"#,
    )
    .unwrap();
    let commands = [
        CommandKind::GenRho,
        CommandKind::Tomo,
        CommandKind::Purity,
        CommandKind::Limited,
    ];
    let mut digests: Vec<Vec<(String, u64)>> = Vec::new();
    for (ri, threads) in [1usize, 2, 1].into_iter().enumerate() {
        let out = base.join(format!("run{ri}"));
        for cmd in commands {
            let opts = CliOptions {
                config: Some(config_path.clone()),
                seed: None,
                threads: Some(threads),
                out: Some(out.clone()),
                dry_run: false,
            };
            let code = run(cmd, &opts).unwrap();
            assert_eq!(code, 0);
        }
        let mut files: Vec<(String, u64)> = std::fs::read_dir(&out)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                let bytes = std::fs::read(e.path()).unwrap();
                (e.file_name().to_string_lossy().into_owned(), stats::fnv1a(&bytes))
            })
            .collect();
        files.sort();
        digests.push(files);
    }
    assert!(!digests[0].is_empty());
    assert_eq!(digests[0], digests[1], "thread count changed the outputs");
    assert_eq!(digests[0], digests[2], "re-run changed the outputs");
    let n_files = digests[0].len();
    let _ = std::fs::remove_dir_all(&base);
    println!(
        "ACCEPTANCE 9 (determinism): PASS — {n_files} output files byte-identical across re-runs and thread counts"
    );
}

/// Criterion 10: the contract identities hold exhaustively for N <= 2 —
/// forward-map completeness, inverse-map conjugate symmetry, the trace
/// contract, and phi-independence of the reconstruction.
#[test]
fn acceptance_10_contract_identities() {
    use xytomo::drive::{forward_map, RotationTimes};
    let time_grid = [0.0, 0.37, 1.9, 7.3, 40.1];
    for n in [1usize, 2] {
        let dim = 1usize << n;
        for ds in [sweet(n), generic_drives(n, 0xA0 + n as u64), generic_drives(n, 0xB0 + n as u64)] {
            for &t0 in &time_grid {
                let t = RotationTimes(vec![t0; n]);
                for s in 0..dim {
                    // trace contract of the inverse map
                    let mut tr = Complex64::ZERO;
                    for a in 0..dim {
                        tr += recon::inverse_map(&ds, &t, BasisIndex(a), BasisIndex(a), BasisIndex(s));
                    }
                    assert!((tr - Complex64::ONE).norm() < 1e-12, "trace contract N={n}");
                }
                for a in 0..dim {
                    // forward completeness on diagonals
                    let mut tot = Complex64::ZERO;
                    for s in 0..dim {
                        tot += forward_map(&ds, &t, BasisIndex(s), BasisIndex(a), BasisIndex(a));
                    }
                    assert!((tot - Complex64::ONE).norm() < 1e-12, "completeness N={n}");
                }
                for a in 0..dim {
                    for b in 0..dim {
                        for s in 0..dim {
                            let ab = recon::inverse_map(&ds, &t, BasisIndex(a), BasisIndex(b), BasisIndex(s));
                            let ba = recon::inverse_map(&ds, &t, BasisIndex(b), BasisIndex(a), BasisIndex(s));
                            assert!((ab - ba.conj()).norm() < 1e-12, "conjugate symmetry N={n}");
                        }
                    }
                }
            }
        }
        // phi-independence: reconstructions agree across drive phases
        let nq = QubitCount::new(n).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(stats::derive_seed(MASTER_SEED, 0xA5 + n as u64));
        let rho = qstate::gen_uniform(nq, 0.5, &mut rng).unwrap();
        let mut reference: Option<xytomo::tomography::TomographyEstimate> = None;
        for phi in [0.0, 0.8, -1.9, 2.6] {
            let drives: Vec<QubitDrive> = (0..n)
                .map(|q| QubitDrive::new(2.0f64.sqrt(), 1.0, phi + 0.3 * q as f64).unwrap())
                .collect();
            let ds = DriveSet::new(drives).unwrap();
            let est = reconstruct_analytic(&ds, &rho, AveragingWindow::Infinite);
            if let Some(prev) = &reference {
                for (x, y) in est.rho_hat.iter().zip(prev.rho_hat.iter()) {
                    assert!((x - y).norm() < 1e-12, "phi dependence N={n}");
                }
            } else {
                reference = Some(est);
            }
        }
    }
    println!(
        "ACCEPTANCE 10 (contract identities): PASS — completeness, conjugate symmetry, trace contract, phi-independence exhaustive for N <= 2"
    );
}
