//! Independent brute-force cross-checks for every estimator path: dense
//! matrix-product simulation, minimum-norm linear inversion of the averaged
//! composition constraint, adaptive quadrature averaging, and repeat-trial
//! variance regression. The oracles share only the basic value types with the
//! primary implementations.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::drive::{unitary, DriveSet, RotationTimes};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::purity::DmuComponent;
use crate::qstate::{DensityMatrix, QubitCount};
use crate::recon;
use crate::sampler::{run_experiment, ExperimentPlan};
use crate::stats::{self, derive_seed};

/// One conformance record: a primary value against its oracle.
#[derive(Clone, Debug)]
pub struct OracleReport {
    pub name: String,
    pub primary: f64,
    pub oracle: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    pub fn compare(name: &str, primary: f64, oracle: f64, tolerance: f64) -> Self {
        let abs_err = (primary - oracle).abs();
        let scale = primary.abs().max(oracle.abs());
        let rel_err = if scale > 0.0 { abs_err / scale } else { 0.0 };
        OracleReport {
            name: name.to_string(),
            primary,
            oracle,
            abs_err,
            rel_err,
            tolerance,
            pass: abs_err <= tolerance,
        }
    }

    /// Pass when the absolute error is inside `tolerance` of either kind.
    pub fn compare_rel(name: &str, primary: f64, oracle: f64, rel_tolerance: f64) -> Self {
        let abs_err = (primary - oracle).abs();
        let scale = primary.abs().max(oracle.abs()).max(1e-300);
        let rel_err = abs_err / scale;
        OracleReport {
            name: name.to_string(),
            primary,
            oracle,
            abs_err,
            rel_err,
            tolerance: rel_tolerance,
            pass: rel_err <= rel_tolerance,
        }
    }
}

/// Outcome distribution via the explicit dense product `diag(U rho U^dag)`.
/// Reference path for [`crate::drive::outcome_probabilities`].
pub fn probs_by_matrix_product(
    ds: &DriveSet,
    t: &RotationTimes,
    rho: &DensityMatrix,
) -> Vec<f64> {
    let u = unitary(ds, t);
    let udag = linalg::adjoint(&u);
    let prod = u.dot(rho.entries()).dot(&udag);
    (0..rho.dim()).map(|s| prod[(s, s)].re.max(0.0)).collect()
}

/// Minimum-norm inverse weights recovered by solving the averaged composition
/// constraint, organized per (a, b) row over the joint (outcome, harmonic)
/// coefficient space.
pub struct SolvedInverse {
    pub n: QubitCount,
    /// `rows[(a << n) | b][(s, k-combination)]` coefficient vector.
    pub rows: Vec<CVec>,
    harmonics_per_qubit: usize,
}

const LINEAR_SOLVE_CAP: usize = 2;

/// Solve `< sum_s X_{abs}(t) M_{s,i,j}(t) >_0 = delta_a^i delta_b^j` for the
/// inverse weights, with `X` expanded over per-qubit harmonics `|k| <= 1`,
/// taking the minimum-norm solution of the underdetermined system. The
/// closed-form inverse map has spin-odd outer harmonics, which makes it
/// orthogonal to the solver's null space; the two agree coefficient by
/// coefficient.
pub fn inverse_by_linear_solve(ds: &DriveSet) -> Result<SolvedInverse> {
    let n = ds.n().get();
    if n > LINEAR_SOLVE_CAP {
        return Err(Error::ContractionTooLarge { limit: LINEAR_SOLVE_CAP, got: n });
    }
    let dim = 1usize << n;
    let hk = 3usize; // k in {-1, 0, 1} per qubit
    let n_harm = hk.pow(n as u32);
    let unknowns = dim * n_harm;
    // m-factor coefficient tables per qubit: coeff[(s,i,j) packed][k+1]
    let mut mtab = vec![[[Complex64::ZERO; 3]; 8]; n];
    for (q, d) in ds.iter().enumerate() {
        for key in 0..8usize {
            let s = if key >> 2 & 1 == 0 { 1i8 } else { -1 };
            let i = if key >> 1 & 1 == 0 { 1i8 } else { -1 };
            let j = if key & 1 == 0 { 1i8 } else { -1 };
            let f = recon::m_factor(d, s, i, j);
            for (slot, k) in [(0usize, -1i32), (1, 0), (2, 1)] {
                mtab[q][key][slot] = f.coeff(k);
            }
        }
    }
    let decode_k = |mut code: usize, q: usize| -> usize {
        for _ in 0..q {
            code /= hk;
        }
        code % hk
    };
    let mut rows = Vec::with_capacity(dim * dim);
    for a in 0..dim {
        for b in 0..dim {
            // constraint matrix: one row per (i, j), one column per (s, kvec)
            let mut mat = CMat::zeros((dim * dim, unknowns));
            let mut rhs = CVec::zeros(dim * dim);
            for i in 0..dim {
                for j in 0..dim {
                    let r = i * dim + j;
                    rhs[r] = if a == i && b == j { Complex64::ONE } else { Complex64::ZERO };
                    for s in 0..dim {
                        for code in 0..n_harm {
                            // <z^k m>_0 pairs harmonic k of X with harmonic -k of m
                            let mut coeff = Complex64::ONE;
                            for q in 0..n {
                                let k_slot = decode_k(code, q);
                                let neg_slot = 2 - k_slot;
                                let key = (((s >> q) & 1) << 2)
                                    | (((i >> q) & 1) << 1)
                                    | ((j >> q) & 1);
                                coeff *= mtab[q][key][neg_slot];
                            }
                            mat[(r, s * n_harm + code)] = coeff;
                        }
                    }
                }
            }
            rows.push(linalg::solve_min_norm(&mat, &rhs)?);
        }
    }
    Ok(SolvedInverse { n: ds.n(), rows, harmonics_per_qubit: hk })
}

impl SolvedInverse {
    /// Closed-form coefficient for comparison: the product of per-qubit
    /// inverse-map harmonics at the same (s, k-combination) slot.
    pub fn closed_form_coefficient(
        ds: &DriveSet,
        a: usize,
        b: usize,
        s: usize,
        code: usize,
    ) -> Complex64 {
        let mut coeff = Complex64::ONE;
        let mut c = code;
        for (q, d) in ds.iter().enumerate() {
            let k = (c % 3) as i32 - 1;
            c /= 3;
            let f = recon::minv_factor(
                d,
                crate::qstate::spin_of(a, q),
                crate::qstate::spin_of(b, q),
                crate::qstate::spin_of(s, q),
            );
            coeff *= f.coeff(k);
        }
        coeff
    }

    /// Largest coefficient discrepancy against the closed form.
    pub fn max_deviation_from_closed_form(&self, ds: &DriveSet) -> f64 {
        let n = self.n.get();
        let dim = 1usize << n;
        let n_harm = self.harmonics_per_qubit.pow(n as u32);
        let mut worst = 0.0f64;
        for a in 0..dim {
            for b in 0..dim {
                let row = &self.rows[a * dim + b];
                for s in 0..dim {
                    for code in 0..n_harm {
                        let solved = row[s * n_harm + code];
                        let closed = Self::closed_form_coefficient(ds, a, b, s, code);
                        worst = worst.max((solved - closed).norm());
                    }
                }
            }
        }
        worst
    }
}

/// Adaptive Simpson quadrature of a complex-valued function over `[0, t_max]`,
/// normalized to the interval average.
pub fn quadrature_average<F>(f: F, t_max: f64, tolerance: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let integral = adaptive_simpson(&f, 0.0, t_max, tolerance * t_max, 24)?;
    Ok(integral / t_max)
}

/// Nested adaptive Simpson over `[0, t_max]^2`, normalized to the average.
pub fn quadrature_average_2d<F>(f: F, t_max: f64, tolerance: f64) -> Result<Complex64>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    let inner_tol = tolerance * t_max * 0.1;
    let outer = adaptive_simpson(
        &|t0: f64| {
            adaptive_simpson(&|t1| f(t0, t1), 0.0, t_max, inner_tol, 20)
                .expect("inner quadrature")
        },
        0.0,
        t_max,
        tolerance * t_max * t_max,
        20,
    )?;
    Ok(outer / (t_max * t_max))
}

fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fb = f(b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = (left + right - whole).norm();
    if err < 15.0 * tol || (b - a) < 1e-12 {
        if depth == 0 && err >= 15.0 * tol {
            return Err(Error::QuadratureDiverged(err));
        }
        return Ok(left + right + (left + right - whole) / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureDiverged(err));
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1)?)
}

/// Fitted variance decomposition from repeat trials over a budget grid.
#[derive(Clone, Debug)]
pub struct DecompositionFit {
    /// Coefficients ordered as [`DmuComponent::ALL`].
    pub coeffs: [f64; 5],
    pub std_errs: [f64; 5],
    /// Per-cell empirical variances, `(n_u, n_m, var, var_of_var)`.
    pub cells: Vec<(usize, usize, f64, f64)>,
}

/// Estimate the five purity-variance components by measuring `Var(mu_hat)`
/// over a grid of `(N_U, N_M)` budgets and regressing onto the basis
/// `N_U^{-m} N_M^{-n}`. Needs at least five distinct budget cells.
pub fn empirical_variance_decomposition(
    ds: &DriveSet,
    rho: &DensityMatrix,
    grid: &[(usize, usize)],
    trials: usize,
    window: f64,
    base_seed: u64,
) -> Result<DecompositionFit> {
    let mut distinct = grid.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 5 {
        return Err(Error::GridTooDegenerate(distinct.len() as f64));
    }
    let mut cells = Vec::with_capacity(grid.len());
    for (cell_idx, &(n_u, n_m)) in grid.iter().enumerate() {
        let mus: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let seed = derive_seed(base_seed, (cell_idx * trials + trial) as u64);
                let plan = ExperimentPlan::new(n_u, n_m, window, seed)?;
                let log = run_experiment(ds, rho, &plan)?;
                Ok(crate::purity::estimate_purity(ds, &log)?.mu_hat)
            })
            .collect::<Result<_>>()?;
        let var = stats::variance(&mus);
        // variance of the sample variance, Gaussian leading order
        let var_of_var = 2.0 * var * var / (trials as f64 - 1.0);
        cells.push((n_u, n_m, var, var_of_var));
    }
    fit_decomposition(&cells)
}

/// Weighted least squares of per-cell variances onto the five basis weights.
pub fn fit_decomposition(cells: &[(usize, usize, f64, f64)]) -> Result<DecompositionFit> {
    let rows: Vec<Vec<f64>> = cells
        .iter()
        .map(|&(n_u, n_m, _, _)| {
            DmuComponent::ALL.iter().map(|c| c.weight(n_u, n_m)).collect()
        })
        .collect();
    let y: Vec<f64> = cells.iter().map(|&(_, _, v, _)| v).collect();
    let w: Vec<f64> = cells.iter().map(|&(_, _, _, vv)| 1.0 / vv.max(1e-300)).collect();
    let fit = stats::weighted_least_squares(&rows, &y, &w)?;
    let mut coeffs = [0.0; 5];
    let mut std_errs = [0.0; 5];
    coeffs.copy_from_slice(&fit.coeffs);
    std_errs.copy_from_slice(&fit.std_errs);
    Ok(DecompositionFit { coeffs, std_errs, cells: cells.to_vec() })
}

/// Monte-Carlo confirmation of the shot-noise weight: the expectation of
/// `sum_ab |Minv_{a,b,s}(t)|^2` over random rotations and sampled outcomes
/// equals `prod_q (5 + 2 S_q)` for any state. Returns `(mean, std_err)`.
///
/// The sampled quantity turns out to be pointwise constant in both `t` and
/// the outcome (the per-qubit weight sums to `5 + 2 S_q` identically), which
/// is the structural reason the shot-noise variance is state-independent;
/// the sampler still exercises the full inverse-map path.
pub fn shot_noise_weight_mc(
    ds: &DriveSet,
    rho: &DensityMatrix,
    trials: usize,
    shots_per_trial: usize,
    window: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    use rand::Rng;
    use rand::SeedableRng;
    let n = ds.n();
    let dim = n.dim();
    let values: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng =
                rand_chacha::ChaCha12Rng::seed_from_u64(derive_seed(seed, trial as u64));
            let t = RotationTimes((0..n.get()).map(|_| rng.random::<f64>() * window).collect());
            let rec = crate::sampler::simulate_shots(ds, &t, rho, shots_per_trial, &mut rng)?;
            // per-observed-outcome weight sum_ab |Minv_{abs}|^2
            let mut weight_by_outcome = vec![0.0f64; dim];
            for s in 0..dim {
                if rec.counts[s] == 0 {
                    continue;
                }
                let mut acc = 0.0;
                for a in 0..dim {
                    for b in 0..dim {
                        acc += recon::inverse_map(
                            ds,
                            &t,
                            crate::qstate::BasisIndex(a),
                            crate::qstate::BasisIndex(b),
                            crate::qstate::BasisIndex(s),
                        )
                        .norm_sqr();
                    }
                }
                weight_by_outcome[s] = acc;
            }
            let mut total = 0.0;
            for (s, &c) in rec.counts.iter().enumerate() {
                total += f64::from(c) * weight_by_outcome[s];
            }
            Ok(total / shots_per_trial as f64)
        })
        .collect::<Result<_>>()?;
    Ok((stats::mean(&values), stats::standard_error(&values)))
}

/// Curated conformance suite: every oracle against its primary path, at the
/// tolerances the checks are specified with.
pub fn run_conformance(seed: u64) -> Result<Vec<OracleReport>> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut reports = Vec::new();
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(derive_seed(seed, 0xC0));

    // 1. outcome probabilities vs dense matrix product, N = 3
    {
        let n = QubitCount::new(3).unwrap();
        let ds = DriveSet::new(vec![
            crate::drive::QubitDrive::new(1.2, 0.8, 0.3)?,
            crate::drive::QubitDrive::new(0.9, -0.6, 1.1)?,
            crate::drive::QubitDrive::new(1.5, 1.0, 0.0)?,
        ])?;
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let rho = crate::qstate::gen_uniform(n, 0.3 + 0.6 * rng.random::<f64>(), &mut rng)?;
            let t = RotationTimes((0..3).map(|_| rng.random::<f64>() * 20.0).collect());
            let fast = crate::drive::outcome_probabilities(&ds, &t, &rho)?;
            let slow = probs_by_matrix_product(&ds, &t, &rho);
            for (a, b) in fast.iter().zip(slow.iter()) {
                worst = worst.max((a - b).abs());
            }
        }
        reports.push(OracleReport::compare("probs_vs_matrix_product_n3", worst, 0.0, 1e-12));
    }

    // 2. trivial matrix-product checks
    {
        let n = QubitCount::new(2).unwrap();
        let ds = DriveSet::sweet_spot(n);
        let rho = crate::qstate::gen_geometric(n, 0.5, &mut rng)?;
        let p0 = probs_by_matrix_product(&ds, &RotationTimes::zero(n), &rho);
        let diag_err: f64 = (0..4)
            .map(|s| (p0[s] - rho.entries()[(s, s)].re).abs())
            .fold(0.0, f64::max);
        reports.push(OracleReport::compare("matrix_product_t0_diagonal", diag_err, 0.0, 1e-12));
        let t = RotationTimes(vec![rng.random::<f64>() * 9.0, rng.random::<f64>() * 9.0]);
        let total: f64 = probs_by_matrix_product(&ds, &t, &rho).iter().sum();
        reports.push(OracleReport::compare("matrix_product_unit_sum", total, 1.0, 1e-12));
    }

    // 3. inverse map via minimum-norm solve, N = 1 sweet spot and generic
    for (label, ds) in [
        ("inverse_solve_n1_sweet", DriveSet::sweet_spot(QubitCount::new(1).unwrap())),
        (
            "inverse_solve_n1_generic",
            DriveSet::new(vec![crate::drive::QubitDrive::new(1.0, 1.0, 0.7)?])?,
        ),
        ("inverse_solve_n2_sweet", DriveSet::sweet_spot(QubitCount::new(2).unwrap())),
    ] {
        let solved = inverse_by_linear_solve(&ds)?;
        let dev = solved.max_deviation_from_closed_form(&ds);
        reports.push(OracleReport::compare(label, dev, 0.0, 1e-10));
    }

    // 4. quadrature vs closed-form harmonic average
    {
        let lam = 1.3;
        let t_max = 37.0;
        let direct = quadrature_average(
            |t| Complex64::from_polar(1.0, lam * t),
            t_max,
            1e-10,
        )?;
        let x = Complex64::new(0.0, lam * t_max);
        let closed = (x.exp() - Complex64::ONE) / x;
        reports.push(OracleReport::compare(
            "quadrature_vs_sinc_factor",
            (direct - closed).norm(),
            0.0,
            1e-9,
        ));
        let ds = DriveSet::new(vec![crate::drive::QubitDrive::new(1.4, 1.0, 0.3)?])?;
        let (a, b, i, j) = (0usize, 1, 0, 1);
        let analytic = recon::i_tensor_avg(
            &ds,
            recon::AveragingWindow::Finite(t_max),
            crate::qstate::BasisIndex(a),
            crate::qstate::BasisIndex(b),
            crate::qstate::BasisIndex(i),
            crate::qstate::BasisIndex(j),
        );
        let quad = quadrature_average(
            |t| {
                recon::i_tensor(
                    &ds,
                    &RotationTimes(vec![t]),
                    crate::qstate::BasisIndex(a),
                    crate::qstate::BasisIndex(b),
                    crate::qstate::BasisIndex(i),
                    crate::qstate::BasisIndex(j),
                )
            },
            t_max,
            1e-10,
        )?;
        reports.push(OracleReport::compare(
            "quadrature_vs_harmonic_i_tensor",
            (quad - analytic).norm(),
            0.0,
            1e-8,
        ));
    }

    // 5. j tensor vs 1D quadrature at N = 1
    {
        let ds = DriveSet::new(vec![crate::drive::QubitDrive::new(1.1, 0.9, 0.2)?])?;
        let t_max = 25.0;
        let d = ds.qubit(0);
        let analytic = recon::j_tensor_avg(
            &ds,
            recon::AveragingWindow::Finite(t_max),
            crate::qstate::BasisIndex(0),
            crate::qstate::BasisIndex(1),
            crate::qstate::BasisIndex(1),
            crate::qstate::BasisIndex(0),
            crate::qstate::BasisIndex(0),
            crate::qstate::BasisIndex(0),
        )?;
        let quad = quadrature_average(
            |t| {
                let mut acc = Complex64::ZERO;
                for s in [1i8, -1] {
                    acc += recon::minv_factor(d, 1, -1, s).eval(d.lambda(), t)
                        * recon::minv_factor(d, -1, 1, s).eval(d.lambda(), t)
                        * recon::m_factor(d, s, 1, 1).eval(d.lambda(), t);
                }
                acc
            },
            t_max,
            1e-9,
        )?;
        reports.push(OracleReport::compare(
            "quadrature_vs_j_tensor",
            (quad - analytic).norm(),
            0.0,
            1e-6,
        ));
    }

    // 6. shot-noise weight Monte Carlo vs closed form, N = 1 sweet spot
    {
        let n = QubitCount::new(1).unwrap();
        let ds = DriveSet::sweet_spot(n);
        let rho = DensityMatrix::maximally_mixed(n);
        let (mean, se) = shot_noise_weight_mc(&ds, &rho, 500, 10, 1e3, derive_seed(seed, 0xA1))?;
        let predicted = crate::tomography::predict_delta_m(&ds);
        let report = OracleReport {
            name: "shot_noise_weight_mc_n1".into(),
            primary: predicted,
            oracle: mean,
            abs_err: (predicted - mean).abs(),
            rel_err: (predicted - mean).abs() / predicted,
            tolerance: 3.0 * se + 0.02,
            pass: (predicted - mean).abs() <= 3.0 * se + 0.02,
        };
        reports.push(report);
    }

    Ok(reports)
}
