//! Single-global-drive variant: every qubit rotates for one common time, so
//! the only tunable frequency is the combination `theta = sum_q lambda_q x_q`
//! with per-qubit coefficients `x_q in {-2..2}`. Reconstruction stays valid as
//! long as no nonzero combination vanishes; the smallest surviving |theta|
//! sets the rotation-time budget and the finite-window systematic bias.

use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::drive::DriveSet;
use crate::error::{Error, Result};
use crate::qstate::DensityMatrix;
use crate::recon::{self, AveragingWindow};
use crate::stats::derive_seed;

/// How a frequency set was produced.
#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    /// `lambda_q = lambda0 / base^q`, `q = 0..N-1`.
    Ladder { base: u32, lambda0: f64 },
    /// iid uniform on `(0, lambda0)`.
    UniformRandom { lambda0: f64, seed: u64 },
    Explicit,
}

/// Per-qubit Rabi frequencies for the limited-control protocol.
#[derive(Clone, Debug)]
pub struct FrequencySet {
    pub lambdas: Vec<f64>,
    pub provenance: Provenance,
}

impl FrequencySet {
    pub fn ladder(n: usize, base: u32, lambda0: f64) -> Self {
        let lambdas = (0..n).map(|q| lambda0 / f64::from(base).powi(q as i32)).collect();
        FrequencySet { lambdas, provenance: Provenance::Ladder { base, lambda0 } }
    }

    pub fn uniform_random(n: usize, lambda0: f64, seed: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, 0x4c4d));
        let lambdas = (0..n)
            .map(|_| {
                loop {
                    let v: f64 = rng.random::<f64>() * lambda0;
                    if v > 0.0 {
                        break v;
                    }
                }
            })
            .collect();
        FrequencySet { lambdas, provenance: Provenance::UniformRandom { lambda0, seed } }
    }

    /// Random frequencies with a common additive offset, `offset + U(0, lambda0)`.
    pub fn uniform_random_offset(n: usize, lambda0: f64, offset: f64, seed: u64) -> Self {
        let mut fs = Self::uniform_random(n, lambda0, seed);
        for l in &mut fs.lambdas {
            *l += offset;
        }
        fs.provenance = Provenance::Explicit;
        fs
    }

    pub fn explicit(lambdas: Vec<f64>) -> Self {
        FrequencySet { lambdas, provenance: Provenance::Explicit }
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Sweet-spot drives at these Rabi frequencies.
    pub fn drives(&self) -> Result<DriveSet> {
        DriveSet::sweet_spot_with_lambdas(&self.lambdas)
    }
}

/// A coefficient vector `x in {-2..2}^N` with its combination value.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaCombination {
    pub coeffs: Vec<i8>,
    pub value: f64,
}

/// Result of the smallest-combination search.
#[derive(Clone, Debug)]
pub struct MinTheta {
    pub value: f64,
    pub argmin: ThetaCombination,
}

const DIRECT_ENUMERATION_CAP: usize = 9;

/// Smallest `|sum_q lambda_q x_q|` over nonzero `x in {-2..2}^N`.
///
/// Exhaustive over the 5^N coefficient vectors (halved by the x -> -x
/// symmetry) up to N = 9; meet-in-the-middle above that. A zero minimum means
/// the set cannot distinguish all density-matrix elements and is reported as
/// degenerate.
pub fn min_theta(fs: &FrequencySet) -> Result<MinTheta> {
    let n = fs.len();
    if n == 0 {
        return Err(Error::Config("empty frequency set".into()));
    }
    let best = if n <= DIRECT_ENUMERATION_CAP {
        min_theta_direct(&fs.lambdas)
    } else {
        min_theta_meet_in_middle(&fs.lambdas)
    };
    let scale = fs.lambdas.iter().cloned().fold(0.0f64, f64::max);
    if best.value < 1e-12 * scale {
        return Err(Error::DegenerateFrequencies(best.coeffs));
    }
    Ok(MinTheta { value: best.value, argmin: best })
}

fn min_theta_direct(lambdas: &[f64]) -> ThetaCombination {
    let n = lambdas.len();
    let mut best = ThetaCombination { coeffs: vec![0; n], value: f64::INFINITY };
    let mut coeffs = vec![-2i8; n];
    // odometer over {-2..2}^N, keeping only vectors whose first nonzero
    // coefficient is positive (x and -x give the same |theta|)
    loop {
        if let Some(&first) = coeffs.iter().find(|&&c| c != 0) {
            if first > 0 {
                let value = coeffs
                    .iter()
                    .zip(lambdas.iter())
                    .map(|(&c, &l)| f64::from(c) * l)
                    .sum::<f64>()
                    .abs();
                if value < best.value {
                    best = ThetaCombination { coeffs: coeffs.clone(), value };
                }
            }
        }
        // increment
        let mut q = 0;
        loop {
            if q == n {
                return best;
            }
            if coeffs[q] == 2 {
                coeffs[q] = -2;
                q += 1;
            } else {
                coeffs[q] += 1;
                break;
            }
        }
    }
}

fn min_theta_meet_in_middle(lambdas: &[f64]) -> ThetaCombination {
    let n = lambdas.len();
    let half = n / 2;
    let (left, right) = lambdas.split_at(half);
    let enumerate = |ls: &[f64]| -> Vec<(f64, Vec<i8>)> {
        let mut out = Vec::with_capacity(5usize.pow(ls.len() as u32));
        let mut coeffs = vec![-2i8; ls.len()];
        loop {
            let sum = coeffs.iter().zip(ls.iter()).map(|(&c, &l)| f64::from(c) * l).sum::<f64>();
            out.push((sum, coeffs.clone()));
            let mut q = 0;
            loop {
                if q == ls.len() {
                    return out;
                }
                if coeffs[q] == 2 {
                    coeffs[q] = -2;
                    q += 1;
                } else {
                    coeffs[q] += 1;
                    break;
                }
            }
        }
    };
    let a = enumerate(left);
    let mut b = enumerate(right);
    b.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut best = ThetaCombination { coeffs: vec![0; n], value: f64::INFINITY };
    for (sa, ca) in &a {
        // nearest right-half sums to -sa
        let target = -sa;
        let pos = b.partition_point(|(s, _)| *s < target);
        for cand in pos.saturating_sub(1)..(pos + 2).min(b.len()) {
            let (sb, cb) = &b[cand];
            if ca.iter().all(|&c| c == 0) && cb.iter().all(|&c| c == 0) {
                continue;
            }
            let value = (sa + sb).abs();
            if value < best.value {
                let mut coeffs = ca.clone();
                coeffs.extend_from_slice(cb);
                best = ThetaCombination { coeffs, value };
            }
        }
    }
    best
}

/// Exact rational minimum for the ladder `lambda_q = lambda0 / base^q`,
/// in units of `lambda0`. For base 3 the result is `3^{-(N-1)}` with
/// coefficients `(1, -2, ..., -2)`.
pub fn min_theta_ladder_exact(n: usize, base: u32) -> (Ratio<i128>, Vec<i8>) {
    let lambdas: Vec<Ratio<i128>> = (0..n)
        .map(|q| Ratio::new(1i128, i128::from(base).pow(q as u32)))
        .collect();
    let mut best_val: Option<Ratio<i128>> = None;
    let mut best_coeffs = vec![0i8; n];
    let mut coeffs = vec![-2i8; n];
    loop {
        if let Some(&first) = coeffs.iter().find(|&&c| c != 0) {
            if first > 0 {
                let mut sum = Ratio::new(0i128, 1i128);
                for (c, l) in coeffs.iter().zip(lambdas.iter()) {
                    sum += Ratio::from_integer(i128::from(*c)) * l;
                }
                let sum = if sum < Ratio::new(0, 1) { -sum } else { sum };
                if sum != Ratio::new(0, 1) && best_val.as_ref().is_none_or(|b| sum < *b) {
                    best_val = Some(sum);
                    best_coeffs = coeffs.clone();
                }
            }
        }
        let mut q = 0;
        loop {
            if q == n {
                return (best_val.expect("nonzero combination exists"), best_coeffs);
            }
            if coeffs[q] == 2 {
                coeffs[q] = -2;
                q += 1;
            } else {
                coeffs[q] += 1;
                break;
            }
        }
    }
}

const SINGLE_TIME_CAP: usize = 8;

/// Window-averaged composition for the single-time protocol. All qubits share
/// the rotation time, so the per-qubit harmonics combine into global
/// frequencies `theta = sum_q k_q lambda_q`; the average keeps `theta = 0`
/// exactly and damps the rest by `1/(theta T)`.
pub fn i_tensor_single_time(
    ds: &DriveSet,
    window: AveragingWindow,
    a: usize,
    b: usize,
    i: usize,
    j: usize,
) -> Result<Complex64> {
    let n = ds.n().get();
    if n > SINGLE_TIME_CAP {
        return Err(Error::ContractionTooLarge { limit: SINGLE_TIME_CAP, got: n });
    }
    let factors: Vec<recon::HarmonicScalar> = ds
        .iter()
        .enumerate()
        .map(|(q, d)| {
            recon::i_factor(
                d,
                crate::qstate::spin_of(a, q),
                crate::qstate::spin_of(b, q),
                crate::qstate::spin_of(i, q),
                crate::qstate::spin_of(j, q),
            )
        })
        .collect();
    let scale = ds.iter().map(|d| d.lambda()).fold(0.0f64, f64::max);
    let mut total = Complex64::ZERO;
    let mut ks = vec![-2i32; n];
    loop {
        let mut coeff = Complex64::ONE;
        for (q, f) in factors.iter().enumerate() {
            coeff *= f.coeff(ks[q]);
            if coeff == Complex64::ZERO {
                break;
            }
        }
        if coeff != Complex64::ZERO {
            let theta: f64 = ks
                .iter()
                .zip(ds.iter())
                .map(|(&k, d)| f64::from(k) * d.lambda())
                .sum();
            let zero_theta = theta.abs() < 1e-12 * scale;
            let zero_k = ks.iter().all(|&k| k == 0);
            if zero_theta && !zero_k {
                // a vanishing nonzero combination aliases another matrix
                // element into this average
                return Err(Error::NonInvertibleFrequencies);
            }
            total += match window {
                AveragingWindow::Infinite => {
                    if zero_theta {
                        coeff
                    } else {
                        Complex64::ZERO
                    }
                }
                AveragingWindow::Finite(t_max) => {
                    if zero_theta {
                        coeff
                    } else {
                        let x = Complex64::new(0.0, theta * t_max);
                        coeff * (x.exp() - Complex64::ONE) / x
                    }
                }
            };
        }
        let mut q = 0;
        loop {
            if q == n {
                return Ok(total);
            }
            if ks[q] == 2 {
                ks[q] = -2;
                q += 1;
            } else {
                ks[q] += 1;
                break;
            }
        }
    }
}

/// Pure finite-window reconstruction bias of the single-time protocol:
/// `max_ab | sum_ij <I_ab^ij>_T rho_ij - rho_ab |`, with exact frequencies and
/// no shot noise.
pub fn systematic_bias(ds: &DriveSet, t_window: f64, rho: &DensityMatrix) -> Result<f64> {
    let dim = ds.n().dim();
    let mut worst = 0.0f64;
    for a in 0..dim {
        for b in 0..dim {
            let mut acc = Complex64::ZERO;
            for i in 0..dim {
                for j in 0..dim {
                    let rij = rho.entries()[(i, j)];
                    if rij == Complex64::ZERO {
                        continue;
                    }
                    acc += i_tensor_single_time(ds, AveragingWindow::Finite(t_window), a, b, i, j)?
                        * rij;
                }
            }
            worst = worst.max((acc - rho.entries()[(a, b)]).norm());
        }
    }
    Ok(worst)
}

/// What the rotation-time budget is for.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum TimeTarget {
    /// Resolving every density-matrix element: `T >~ 2^N / min theta`.
    Tomography,
    /// Purity only: `T >~ 1 / min theta`.
    Purity,
}

/// Required maximum rotation time for the chosen target.
pub fn required_time(fs: &FrequencySet, target: TimeTarget) -> Result<f64> {
    let mt = min_theta(fs)?;
    let scale = match target {
        TimeTarget::Tomography => (1u64 << fs.len()) as f64,
        TimeTarget::Purity => 1.0,
    };
    Ok(scale / mt.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ladder_minimum_closed_form() {
        for n in 1..=8usize {
            let fs = FrequencySet::ladder(n, 3, 1.0);
            let mt = min_theta(&fs).unwrap();
            let expect = 3.0f64.powi(-(n as i32 - 1));
            assert_abs_diff_eq!(mt.value, expect, epsilon = 1e-12 * expect.max(1.0));
            // the argmin attains the minimum; (1, -2, ..., -2) is one of the
            // minimizing combinations (ties exist, e.g. (0, ..., 0, 1))
            let recompute: f64 = mt
                .argmin
                .coeffs
                .iter()
                .zip(fs.lambdas.iter())
                .map(|(&c, &l)| f64::from(c) * l)
                .sum::<f64>()
                .abs();
            assert_abs_diff_eq!(recompute, expect, epsilon = 1e-12 * expect.max(1.0));
            if n > 1 {
                let mut canonical = vec![-2i8; n];
                canonical[0] = 1;
                let canon_value: f64 = canonical
                    .iter()
                    .zip(fs.lambdas.iter())
                    .map(|(&c, &l)| f64::from(c) * l)
                    .sum::<f64>()
                    .abs();
                assert_abs_diff_eq!(canon_value, expect, epsilon = 1e-12 * expect.max(1.0));
            }
        }
    }

    #[test]
    fn single_frequency_minimum_is_lambda() {
        let fs = FrequencySet::explicit(vec![0.7]);
        let mt = min_theta(&fs).unwrap();
        assert_abs_diff_eq!(mt.value, 0.7, epsilon = 1e-12);
        assert_eq!(mt.argmin.coeffs, vec![1]);
    }

    #[test]
    fn rational_ladder_exact() {
        for n in 1..=8usize {
            let (val, coeffs) = min_theta_ladder_exact(n, 3);
            assert_eq!(val, Ratio::new(1i128, 3i128.pow(n as u32 - 1)));
            // the reported combination attains the exact minimum
            let mut sum = Ratio::new(0i128, 1);
            for (q, &c) in coeffs.iter().enumerate() {
                sum += Ratio::new(i128::from(c), 3i128.pow(q as u32));
            }
            let sum = if sum < Ratio::new(0, 1) { -sum } else { sum };
            assert_eq!(sum, val);
        }
    }

    #[test]
    fn meet_in_middle_agrees_with_direct() {
        for seed in 0..5u64 {
            let fs = FrequencySet::uniform_random(8, 1.0, seed);
            let direct = min_theta_direct(&fs.lambdas);
            let mitm = min_theta_meet_in_middle(&fs.lambdas);
            assert_abs_diff_eq!(direct.value, mitm.value, epsilon = 1e-12);
        }
    }

    #[test]
    fn degenerate_set_is_rejected() {
        let fs = FrequencySet::explicit(vec![1.0, 0.5]);
        assert!(matches!(min_theta(&fs), Err(Error::DegenerateFrequencies(_))));
    }

    #[test]
    fn single_time_matches_per_qubit_average_at_n1() {
        let fs = FrequencySet::explicit(vec![1.3]);
        let ds = fs.drives().unwrap();
        for window in [AveragingWindow::Infinite, AveragingWindow::Finite(47.0)] {
            for a in 0..2usize {
                for b in 0..2usize {
                    for i in 0..2usize {
                        for j in 0..2usize {
                            let single = i_tensor_single_time(&ds, window, a, b, i, j).unwrap();
                            let multi = recon::i_tensor_avg(
                                &ds,
                                window,
                                crate::qstate::BasisIndex(a),
                                crate::qstate::BasisIndex(b),
                                crate::qstate::BasisIndex(i),
                                crate::qstate::BasisIndex(j),
                            );
                            assert!((single - multi).norm() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn zero_frequency_condition_matches_index_condition() {
        // independent ladder: theta(a-b-i+j) = 0 iff a-b = i-j, checked via
        // the infinite-window average reproducing the Kronecker pair
        let fs = FrequencySet::ladder(3, 3, 1.0);
        let ds = fs.drives().unwrap();
        for a in 0..8usize {
            for b in 0..8usize {
                for i in 0..8usize {
                    for j in 0..8usize {
                        let v = i_tensor_single_time(&ds, AveragingWindow::Infinite, a, b, i, j)
                            .unwrap();
                        let expect = if a == i && b == j { 1.0 } else { 0.0 };
                        assert!(
                            (v - Complex64::new(expect, 0.0)).norm() < 1e-12,
                            "({a},{b},{i},{j}) -> {v}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn finite_window_bias_slope_single_time() {
        use rand::SeedableRng;
        let fs = FrequencySet::ladder(2, 3, 1.0);
        let ds = fs.drives().unwrap();
        let n = crate::qstate::QubitCount::new(2).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(12);
        let rho = crate::qstate::gen_uniform(n, 0.5, &mut rng).unwrap();
        let theta_min = min_theta(&fs).unwrap().value;
        let ts: Vec<f64> = (0..16).map(|k| 30.0 / theta_min * 1.6f64.powi(k)).collect();
        let errs: Vec<f64> = ts.iter().map(|&t| systematic_bias(&ds, t, &rho).unwrap()).collect();
        let slope = crate::stats::log_log_slope(&ts, &errs);
        assert!((slope + 1.0).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn single_time_converges_within_budget_at_n3() {
        use rand::SeedableRng;
        // max-entry error below 1e-3 at T = 1e3 / theta_min
        let fs = FrequencySet::ladder(3, 3, 1.0);
        let ds = fs.drives().unwrap();
        let tm = min_theta(&fs).unwrap().value;
        let n = crate::qstate::QubitCount::new(3).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(41);
        let rho = crate::qstate::gen_uniform(n, 0.4, &mut rng).unwrap();
        let bias = systematic_bias(&ds, 1e3 / tm, &rho).unwrap();
        assert!(bias < 1e-3, "bias {bias}");
    }

    #[test]
    fn bias_vanishes_at_large_window() {
        let fs = FrequencySet::ladder(2, 3, 1.0);
        let ds = fs.drives().unwrap();
        let n = crate::qstate::QubitCount::new(2).unwrap();
        let rho = crate::qstate::DensityMatrix::maximally_mixed(n);
        let theta_min = min_theta(&fs).unwrap().value;
        let bias = systematic_bias(&ds, 1e6 / theta_min, &rho).unwrap();
        assert!(bias < 1e-4, "bias {bias}");
    }

    #[test]
    fn ladder_beats_random_when_its_gap_is_larger() {
        use rand::SeedableRng;
        let ladder = FrequencySet::ladder(3, 3, 1.0);
        let n = crate::qstate::QubitCount::new(3).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(77);
        let rho = crate::qstate::gen_uniform(n, 0.5, &mut rng).unwrap();
        // a random set whose min theta is smaller than the ladder's
        let mut random = None;
        for seed in 0..50u64 {
            let fs = FrequencySet::uniform_random(3, 1.0, seed);
            if let Ok(mt) = min_theta(&fs) {
                if mt.value < 0.3 * min_theta(&ladder).unwrap().value {
                    random = Some(fs);
                    break;
                }
            }
        }
        let random = random.expect("found a random set with a smaller gap");
        let t = 300.0 / min_theta(&ladder).unwrap().value;
        let bias_ladder = systematic_bias(&ladder.drives().unwrap(), t, &rho).unwrap();
        let bias_random = systematic_bias(&random.drives().unwrap(), t, &rho).unwrap();
        assert!(
            bias_ladder < bias_random,
            "ladder {bias_ladder} vs random {bias_random}"
        );
    }

    #[test]
    fn required_time_targets() {
        let fs = FrequencySet::ladder(4, 3, 1.0);
        let tom = required_time(&fs, TimeTarget::Tomography).unwrap();
        let pur = required_time(&fs, TimeTarget::Purity).unwrap();
        // ladder: 2^N 3^{N-1} and 3^{N-1}
        assert_abs_diff_eq!(tom, 16.0 * 27.0, epsilon = 1e-9);
        assert_abs_diff_eq!(pur, 27.0, epsilon = 1e-9);
        assert_abs_diff_eq!(tom / pur, 16.0, epsilon = 1e-12);
    }
}
