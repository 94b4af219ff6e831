//! Full linear-inversion state tomography from a run log, with every variance
//! formula and scaling prediction for the X/Y rotation protocol.
//!
//! The total estimator variance splits into a per-unitary part and a per-shot
//! part, `total = dU^2/N_U + dM^2/(N_U N_M)`. For this protocol the shot part
//! contracts to the closed form `prod_q (5 + 2 S_q)`, minimized at the sweet
//! spot `g = sqrt(2) nu` where it equals `5^N`; the per-unitary part is
//! state-dependent and is predicted here in max / likely / amortized variants.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::drive::DriveSet;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::qstate::{DensityMatrix, QubitCount};
use crate::recon::{self, AveragingWindow};
use crate::sampler::RunLog;

/// Raw linear-inversion estimate. Hermitian with unit trace by construction,
/// but generally not positive semidefinite; use
/// [`crate::qstate::clip_to_physical`] if a physical matrix is needed
/// downstream.
#[derive(Clone, Debug)]
pub struct TomographyEstimate {
    pub n: QubitCount,
    pub rho_hat: CMat,
}

impl TomographyEstimate {
    pub fn trace(&self) -> Complex64 {
        (0..self.n.dim()).map(|i| self.rho_hat[(i, i)]).sum()
    }

    /// Total squared deviation from a reference state,
    /// `sum_ab |rho_hat_ab - rho_ab|^2`.
    pub fn squared_error(&self, truth: &DensityMatrix) -> f64 {
        self.rho_hat
            .iter()
            .zip(truth.entries().iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum()
    }
}

/// Average the per-rotation observables over the log:
/// `rho_hat_ab = (1/N_U) sum_i r_ab(t_i, freqs_i)`.
pub fn reconstruct(ds: &DriveSet, log: &RunLog) -> Result<TomographyEstimate> {
    if log.records.is_empty() {
        return Err(Error::EmptyLog);
    }
    let dim = ds.n().dim();
    let partials: Vec<CMat> = log
        .records
        .par_iter()
        .map(|rec| recon::r_matrix(ds, &rec.times, &rec.frequencies()))
        .collect();
    let mut acc = CMat::zeros((dim, dim));
    for p in &partials {
        acc += p;
    }
    let scale = Complex64::new(1.0 / log.records.len() as f64, 0.0);
    acc.mapv_inplace(|z| z * scale);
    Ok(TomographyEstimate { n: ds.n(), rho_hat: acc })
}

/// The estimator's exact expectation under the given averaging window:
/// `rho_hat_ab = sum_ij <I_ab^ij> rho_ij`. With the infinite window this is
/// the input state itself; at finite `T` it exposes the pure systematic bias.
pub fn reconstruct_analytic(
    ds: &DriveSet,
    rho: &DensityMatrix,
    window: AveragingWindow,
) -> TomographyEstimate {
    let n = ds.n().get();
    let dim = 1usize << n;
    // per-qubit averaged composition factors, indexed by packed (a,b,i,j) bits
    let mut table = vec![[Complex64::ZERO; 16]; n];
    for (q, d) in ds.iter().enumerate() {
        for key in 0..16usize {
            let a = bit_spin(key, 3);
            let b = bit_spin(key, 2);
            let i = bit_spin(key, 1);
            let j = bit_spin(key, 0);
            table[q][key] = recon::i_factor(d, a, b, i, j).average(d.lambda(), window);
        }
    }
    let mut out = CMat::zeros((dim, dim));
    for a in 0..dim {
        for b in a..dim {
            let mut acc = Complex64::ZERO;
            for i in 0..dim {
                for j in 0..dim {
                    let rij = rho.entries()[(i, j)];
                    if rij == Complex64::ZERO {
                        continue;
                    }
                    let mut prod = Complex64::ONE;
                    for (q, tq) in table.iter().enumerate() {
                        let key = (((a >> q) & 1) << 3)
                            | (((b >> q) & 1) << 2)
                            | (((i >> q) & 1) << 1)
                            | ((j >> q) & 1);
                        prod *= tq[key];
                        if prod == Complex64::ZERO {
                            break;
                        }
                    }
                    acc += prod * rij;
                }
            }
            out[(a, b)] = acc;
            if a != b {
                out[(b, a)] = acc.conj();
            }
        }
    }
    TomographyEstimate { n: ds.n(), rho_hat: out }
}

/// Systematic reconstruction error of the per-qubit-time protocol at window
/// `T`: the largest entrywise deviation of the exact estimator expectation.
pub fn systematic_bias_perqubit(ds: &DriveSet, rho: &DensityMatrix, t_window: f64) -> f64 {
    let est = reconstruct_analytic(ds, rho, AveragingWindow::Finite(t_window));
    est.rho_hat
        .iter()
        .zip(rho.entries().iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

#[inline]
fn bit_spin(key: usize, bit: usize) -> i8 {
    if (key >> bit) & 1 == 0 {
        1
    } else {
        -1
    }
}

/// Mean over repeat trials of the total squared deviation.
pub fn total_variance_empirical(
    rho_true: &DensityMatrix,
    estimates: &[TomographyEstimate],
) -> Result<f64> {
    if estimates.len() < 2 {
        return Err(Error::TooFewMatrices(estimates.len()));
    }
    for e in estimates {
        if e.n != rho_true.n() {
            return Err(Error::DimensionMismatch { expected: rho_true.dim(), got: e.n.dim() });
        }
    }
    Ok(estimates.iter().map(|e| e.squared_error(rho_true)).sum::<f64>() / estimates.len() as f64)
}

/// Shot-noise variance factor `(dtom^M)^2 = prod_q (5 + 2 S_q)`; equals `5^N`
/// at the sweet spot and is independent of the state.
pub fn predict_delta_m(ds: &DriveSet) -> f64 {
    ds.iter().map(|d| 5.0 + 2.0 * d.s_param()).product()
}

/// Which bound to evaluate for the per-unitary variance.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum VarianceMode {
    /// Rigorous upper bound `4^N prod_q max(3 + S g^2/l^2, 2 + S(1 + nu^2/l^2))`.
    Max,
    /// Coherent-terms estimate
    /// `prod_q (2 + S(1 + nu^2/l^2)) + mu prod_q max(...)`.
    Likely,
    /// Ensemble-averaged estimate `mu prod_q (5/2 + S_q) + 1/2^N`.
    Amortized,
}

/// Per-unitary variance prediction `(dtom^U)^2` for a state of purity `mu`.
pub fn predict_delta_u(ds: &DriveSet, mu: f64, mode: VarianceMode) -> f64 {
    let n = ds.n().get() as i32;
    match mode {
        VarianceMode::Max => {
            let prod: f64 = ds.iter().map(max_term).product();
            4.0f64.powi(n) * prod
        }
        VarianceMode::Likely => {
            let incoherent: f64 = ds.iter().map(diag_term).product();
            let coherent: f64 = ds.iter().map(max_term).product();
            incoherent + mu * coherent
        }
        VarianceMode::Amortized => {
            let prod: f64 = ds.iter().map(|d| 2.5 + d.s_param()).product();
            mu * prod + 0.5f64.powi(n)
        }
    }
}

fn max_term(d: &crate::drive::QubitDrive) -> f64 {
    let s = d.s_param();
    let l2 = d.lambda() * d.lambda();
    let g2 = d.g() * d.g();
    let nu2 = d.nu() * d.nu();
    (3.0 + s * g2 / l2).max(2.0 + s * (1.0 + nu2 / l2))
}

fn diag_term(d: &crate::drive::QubitDrive) -> f64 {
    let s = d.s_param();
    let l2 = d.lambda() * d.lambda();
    let nu2 = d.nu() * d.nu();
    2.0 + s * (1.0 + nu2 / l2)
}

/// Combined variance prediction.
#[derive(Copy, Clone, Debug)]
pub struct TomographyVariance {
    pub delta_u_sq: f64,
    pub delta_m_sq: f64,
}

impl TomographyVariance {
    pub fn predict(ds: &DriveSet, mu: f64, mode: VarianceMode) -> Self {
        TomographyVariance {
            delta_u_sq: predict_delta_u(ds, mu, mode),
            delta_m_sq: predict_delta_m(ds),
        }
    }

    /// `dU^2/N_U + dM^2/(N_U N_M)`.
    pub fn total(&self, n_u: usize, n_m: usize) -> f64 {
        self.delta_u_sq / n_u as f64 + self.delta_m_sq / (n_u as f64 * n_m as f64)
    }
}

/// The 3^N-setting Pauli-product baseline: per-shot variance `(2^N - mu)/N_M`
/// and total measurement count `6^N / delta^2`.
#[derive(Copy, Clone, Debug)]
pub struct NaiveBaseline {
    pub n: QubitCount,
    pub mu: f64,
    pub delta_target: f64,
}

impl NaiveBaseline {
    pub fn new(n: QubitCount, mu: f64, delta_target: f64) -> Result<Self> {
        if delta_target.is_nan() || delta_target <= 0.0 {
            return Err(Error::Config(format!(
                "delta_target must be positive (got {delta_target})"
            )));
        }
        Ok(NaiveBaseline { n, mu, delta_target })
    }

    pub fn variance_per_setting(&self, n_m: usize) -> f64 {
        (self.n.dim() as f64 - self.mu) / n_m as f64
    }

    pub fn n_total(&self) -> f64 {
        6.0f64.powi(self.n.get() as i32) / (self.delta_target * self.delta_target)
    }
}

/// Measurements needed by the Fourier protocol:
/// `prod_q (5 + 2 S_q) / delta^2`, i.e. `5^N/delta^2` at the sweet spot.
pub fn required_measurements(ds: &DriveSet, delta_target: f64) -> f64 {
    predict_delta_m(ds) / (delta_target * delta_target)
}

const EXACT_CONTRACTION_CAP: usize = 2;

/// Per-qubit shot-noise weight table `wm(i, j) = sum_{x,y} jbar(x,y,y,x,i,j)`,
/// packed by (i, j) bits.
fn wm_table(d: &crate::drive::QubitDrive) -> Result<[Complex64; 4]> {
    let mut out = [Complex64::ZERO; 4];
    for key in 0..4usize {
        let i = bit_spin(key, 1);
        let j = bit_spin(key, 0);
        let mut acc = Complex64::ZERO;
        for x in [1i8, -1] {
            for y in [1i8, -1] {
                acc += recon::j_factor(d, x, y, y, x, i, j)?.coeff(0);
            }
        }
        out[key] = acc;
    }
    Ok(out)
}

/// Per-qubit unitary-noise weight table
/// `wu(i, j, jp, ip) = sum_{x,y} <i(x,y,i,j) i(y,x,jp,ip)>_0`, packed by
/// (i, j, jp, ip) bits.
pub(crate) fn wu_table(d: &crate::drive::QubitDrive) -> Result<[Complex64; 16]> {
    let mut out = [Complex64::ZERO; 16];
    for key in 0..16usize {
        let i = bit_spin(key, 3);
        let j = bit_spin(key, 2);
        let jp = bit_spin(key, 1);
        let ip = bit_spin(key, 0);
        let mut acc = Complex64::ZERO;
        for x in [1i8, -1] {
            for y in [1i8, -1] {
                let prod = recon::i_factor(d, x, y, i, j).mul(&recon::i_factor(d, y, x, jp, ip))?;
                acc += prod.coeff(0);
            }
        }
        out[key] = acc;
    }
    Ok(out)
}

/// Exact shot-noise contraction `sum_ij rho_ij W^M_ij - mu`. The weight
/// factorizes per qubit, so this works at any supported N; it equals
/// `prod_q (5 + 2 S_q) - mu` identically and serves as the oracle for
/// [`predict_delta_m`].
pub fn exact_delta_m_sq(ds: &DriveSet, rho: &DensityMatrix) -> Result<f64> {
    let n = ds.n().get();
    let tables: Vec<[Complex64; 4]> = ds.iter().map(wm_table).collect::<Result<_>>()?;
    let dim = 1usize << n;
    let mut acc = Complex64::ZERO;
    for i in 0..dim {
        for j in 0..dim {
            let rij = rho.entries()[(i, j)];
            if rij == Complex64::ZERO {
                continue;
            }
            let mut w = Complex64::ONE;
            for (q, t) in tables.iter().enumerate() {
                w *= t[(((i >> q) & 1) << 1) | ((j >> q) & 1)];
            }
            acc += w * rij;
        }
    }
    Ok(acc.re - rho.purity())
}

/// Exact per-unitary contraction
/// `sum rho_ij rho_j'i' W^U_{ij,j'i'} - mu`, restricted to N <= 2 where the
/// 16^N index sum is affordable. Oracle for [`predict_delta_u`].
pub fn exact_delta_u_sq(ds: &DriveSet, rho: &DensityMatrix) -> Result<f64> {
    let n = ds.n().get();
    if n > EXACT_CONTRACTION_CAP {
        return Err(Error::ContractionTooLarge { limit: EXACT_CONTRACTION_CAP, got: n });
    }
    let tables: Vec<[Complex64; 16]> = ds.iter().map(wu_table).collect::<Result<_>>()?;
    let dim = 1usize << n;
    let mut acc = Complex64::ZERO;
    for i in 0..dim {
        for j in 0..dim {
            let rij = rho.entries()[(i, j)];
            if rij == Complex64::ZERO {
                continue;
            }
            for ip in 0..dim {
                for jp in 0..dim {
                    let rji = rho.entries()[(jp, ip)];
                    if rji == Complex64::ZERO {
                        continue;
                    }
                    let mut w = Complex64::ONE;
                    for (q, t) in tables.iter().enumerate() {
                        let key = (((i >> q) & 1) << 3)
                            | (((j >> q) & 1) << 2)
                            | (((jp >> q) & 1) << 1)
                            | ((ip >> q) & 1);
                        w *= t[key];
                    }
                    acc += w * rij * rji;
                }
            }
        }
    }
    Ok(acc.re - rho.purity())
}

/// Average of the diagonal-pair unitary weight, `av_{i,j} W^U_{ij,ji}`; equals
/// `prod_q (5/2 + S_q)`.
pub fn average_wu_coherent(ds: &DriveSet) -> Result<f64> {
    let mut prod = 1.0;
    for d in ds.iter() {
        let t = wu_table(d)?;
        // per-qubit average over (i, j) of wu(i, j, j, i)
        let mut acc = Complex64::ZERO;
        for i in 0..2usize {
            for j in 0..2usize {
                acc += t[(i << 3) | (j << 2) | (j << 1) | i];
            }
        }
        prod *= acc.re / 4.0;
    }
    Ok(prod)
}
