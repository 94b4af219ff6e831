//! Dense N-qubit density matrices, Haar-random states, and the three random
//! density-matrix generators used to build test ensembles.
//!
//! Basis convention, shared by every module: qubit `q` occupies bit `q` of a
//! basis index (qubit 0 least significant); bit value 0 is spin up (+1), bit
//! value 1 is spin down (-1).

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array1;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;
pub const NORM_TOL: f64 = 1e-12;

/// Number of qubits, capped so the dense 4^N storage stays addressable.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct QubitCount(usize);

impl QubitCount {
    pub const MAX: usize = 12;

    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > Self::MAX {
            return Err(Error::BadQubitCount(n));
        }
        Ok(QubitCount(n))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Hilbert-space dimension 2^N.
    pub fn dim(self) -> usize {
        1 << self.0
    }
}

/// Index into the lab (Z) product basis.
///
/// Bit `q` holds qubit `q`; bit 0 is spin up. `spin` maps to the +/-1 values
/// the estimator formulas are written in.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasisIndex(pub usize);

impl BasisIndex {
    #[inline]
    pub fn spin(self, q: usize) -> i8 {
        spin_of(self.0, q)
    }

    pub fn from_spins(spins: &[i8]) -> Self {
        let mut idx = 0usize;
        for (q, &s) in spins.iter().enumerate() {
            if s < 0 {
                idx |= 1 << q;
            }
        }
        BasisIndex(idx)
    }
}

/// Spin of qubit `q` in basis state `idx`: +1 for up (bit 0), -1 for down.
#[inline]
pub fn spin_of(idx: usize, q: usize) -> i8 {
    if (idx >> q) & 1 == 0 {
        1
    } else {
        -1
    }
}

/// A normalized pure state.
#[derive(Clone, Debug)]
pub struct PureState {
    n: QubitCount,
    amps: Array1<Complex64>,
}

impl PureState {
    pub fn new(n: QubitCount, amps: Array1<Complex64>) -> Result<Self> {
        if amps.len() != n.dim() {
            return Err(Error::DimensionMismatch { expected: n.dim(), got: amps.len() });
        }
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(PureState { n, amps })
    }

    /// Computational basis state |idx>.
    pub fn basis(n: QubitCount, idx: usize) -> Self {
        let mut amps = Array1::zeros(n.dim());
        amps[idx] = Complex64::ONE;
        PureState { n, amps }
    }

    pub fn n(&self) -> QubitCount {
        self.n
    }

    pub fn amplitudes(&self) -> &Array1<Complex64> {
        &self.amps
    }

    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Dense Hermitian trace-one positive-semidefinite matrix.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    n: QubitCount,
    entries: CMat,
}

impl DensityMatrix {
    /// Validating constructor: Hermitian to 1e-10, unit trace to 1e-10,
    /// smallest eigenvalue above -1e-9.
    pub fn new(n: QubitCount, entries: CMat) -> Result<Self> {
        let dim = n.dim();
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: entries.nrows() });
        }
        let defect = linalg::hermiticity_defect(&entries);
        if defect > HERMITICITY_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr: Complex64 = (0..dim).map(|i| entries[(i, i)]).sum();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::TraceNotOne(tr.re));
        }
        if !linalg::cholesky_shifted_ok(&entries, PSD_TOL) {
            return Err(Error::NotPsd(linalg::min_eigenvalue(&entries)));
        }
        Ok(DensityMatrix { n, entries })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let dim = psi.n.dim();
        let mut m = CMat::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = psi.amps[i] * psi.amps[j].conj();
            }
        }
        DensityMatrix { n: psi.n, entries: m }
    }

    pub fn maximally_mixed(n: QubitCount) -> Self {
        let dim = n.dim();
        let mut m = CMat::zeros((dim, dim));
        let w = Complex64::new(1.0 / dim as f64, 0.0);
        for i in 0..dim {
            m[(i, i)] = w;
        }
        DensityMatrix { n, entries: m }
    }

    pub fn n(&self) -> QubitCount {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n.dim()
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    #[inline]
    pub fn entry(&self, a: BasisIndex, b: BasisIndex) -> Complex64 {
        self.entries[(a.0, b.0)]
    }

    /// Tr rho^2 = sum |rho_ab|^2.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Purity of a validated density matrix, guarded to the physical range.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

/// Haar-random pure state: normalized vector of iid complex Gaussians.
pub fn haar_state<R: Rng + ?Sized>(n: QubitCount, rng: &mut R) -> PureState {
    let dim = n.dim();
    let mut amps = Array1::zeros(dim);
    for a in amps.iter_mut() {
        *a = Complex64::new(gaussian(rng), gaussian(rng));
    }
    let norm = amps.iter().map(|z: &Complex64| z.norm_sqr()).sum::<f64>().sqrt();
    amps.mapv_inplace(|z| z / norm);
    PureState { n, amps }
}

/// Standard normal via Box-Muller.
fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        if u > f64::MIN_POSITIVE {
            return (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos();
        }
    }
}

/// Modified Gram-Schmidt. Fails when an input collapses onto the span of the
/// previous ones.
pub fn orthonormalize(states: &[PureState]) -> Result<Vec<PureState>> {
    let mut out: Vec<PureState> = Vec::with_capacity(states.len());
    for s in states {
        let mut v = s.amps.clone();
        for prev in &out {
            let ov: Complex64 = prev
                .amps
                .iter()
                .zip(v.iter())
                .map(|(p, x)| p.conj() * x)
                .sum();
            for (x, p) in v.iter_mut().zip(prev.amps.iter()) {
                *x -= ov * p;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            return Err(Error::DegenerateInput(norm));
        }
        v.mapv_inplace(|z| z / norm);
        out.push(PureState { n: s.n, amps: v });
    }
    Ok(out)
}

fn mixture(n: QubitCount, states: &[PureState], weights: &[f64]) -> DensityMatrix {
    let dim = n.dim();
    let mut m = CMat::zeros((dim, dim));
    for (w, psi) in weights.iter().zip(states.iter()) {
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] += *w * psi.amps[i] * psi.amps[j].conj();
            }
        }
    }
    DensityMatrix { n, entries: m }
}

/// Geometrically weighted Haar-random mixture: `m = min(2^N, 30)`
/// orthonormalized Haar vectors with weights `w_k = A x^k`, where `(A, x)`
/// solve `sum w = 1`, `sum w^2 = mu`. We take the decaying branch
/// `x in (0, 1)`.
pub fn gen_geometric<R: Rng + ?Sized>(
    n: QubitCount,
    mu_target: f64,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let m = n.dim().min(30);
    let lo = 1.0 / m as f64;
    if mu_target <= lo || mu_target >= 1.0 {
        return Err(Error::UnreachablePurity { target: mu_target, lo, hi: 1.0 });
    }
    // purity of geometric weights as a function of x; decreasing from 1 to 1/m
    let purity_of = |x: f64| -> f64 {
        let mut sw = 0.0;
        let mut sw2 = 0.0;
        let mut xk = 1.0;
        for _ in 0..m {
            xk *= x;
            sw += xk;
            sw2 += xk * xk;
        }
        sw2 / (sw * sw)
    };
    let (mut a, mut b) = (1e-12, 1.0 - 1e-12);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if purity_of(mid) > mu_target {
            a = mid;
        } else {
            b = mid;
        }
    }
    let x = 0.5 * (a + b);
    let mut weights: Vec<f64> = (1..=m).map(|k| x.powi(k as i32)).collect();
    let sw: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sw;
    }
    let raw: Vec<PureState> = (0..m).map(|_| haar_state(n, rng)).collect();
    let states = orthonormalize(&raw)?;
    Ok(mixture(n, &states, &weights))
}

/// Uniformly weighted Haar-random mixture: `n_vec = ceil(1/mu)`
/// orthonormalized Haar vectors with one heavier weight
/// `w1 = (1 + sqrt((n_vec mu - 1)(n_vec - 1)))/n_vec` solving
/// `w1^2 + (1 - w1)^2/(n_vec - 1) = mu`, the remainder spread evenly.
pub fn gen_uniform<R: Rng + ?Sized>(
    n: QubitCount,
    mu_target: f64,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let dim = n.dim();
    let lo = 1.0 / dim as f64;
    if mu_target < lo - 1e-12 || mu_target > 1.0 {
        return Err(Error::UnreachablePurity { target: mu_target, lo, hi: 1.0 });
    }
    let n_vec = (1.0 / mu_target).ceil() as usize;
    if n_vec > dim {
        return Err(Error::UnreachablePurity { target: mu_target, lo, hi: 1.0 });
    }
    if n_vec == 1 {
        return Ok(DensityMatrix::from_pure(&haar_state(n, rng)));
    }
    let disc = (n_vec as f64 * mu_target - 1.0) * (n_vec as f64 - 1.0);
    if disc < -1e-12 {
        return Err(Error::UnreachablePurity { target: mu_target, lo: 1.0 / n_vec as f64, hi: 1.0 });
    }
    let w1 = (1.0 + disc.max(0.0).sqrt()) / n_vec as f64;
    let rest = (1.0 - w1) / (n_vec - 1) as f64;
    let mut weights = vec![rest; n_vec];
    weights[0] = w1;
    let raw: Vec<PureState> = (0..n_vec).map(|_| haar_state(n, rng)).collect();
    let states = orthonormalize(&raw)?;
    Ok(mixture(n, &states, &weights))
}

/// Ancilla-count selector value for the traced generator:
/// `2^-N + 2^-k - 2^-(k+N)`, the large-dimension approximation of the mean
/// reduced purity.
pub fn traced_mean_purity(n: QubitCount, k: usize) -> f64 {
    let dn = n.dim() as f64;
    let dk = (1u64 << k) as f64;
    1.0 / dn + 1.0 / dk - 1.0 / (dk * dn)
}

/// Exact Haar mean of the reduced purity when tracing `k` ancilla qubits,
/// `(d_A + d_B) / (d_A d_B + 1)`; the selector formula above approaches this
/// as the dimensions grow.
pub fn traced_exact_mean_purity(n: QubitCount, k: usize) -> f64 {
    let da = n.dim() as f64;
    let db = (1u64 << k) as f64;
    (da + db) / (da * db + 1.0)
}

/// Partial trace from a higher-dimensional Haar vector: pick the integer
/// `k >= 1` whose selector value is closest to the target, sample a Haar
/// state on `N + k` qubits, and trace the ancillas out. Returns the matrix
/// together with its documented expected purity (the exact Haar mean for the
/// chosen ancilla count).
pub fn gen_traced<R: Rng + ?Sized>(
    n: QubitCount,
    mu_target: f64,
    rng: &mut R,
) -> Result<(DensityMatrix, f64)> {
    // Selector value is monotone decreasing in k; the ancilla count is capped
    // by the dense-storage limit on N + k.
    let k_cap = QubitCount::MAX.saturating_sub(n.get());
    if k_cap == 0 {
        return Err(Error::BadQubitCount(n.get() + 1));
    }
    let mut best_k = 1;
    let mut best_err = f64::INFINITY;
    for k in 1..=k_cap {
        let err = (mu_target - traced_mean_purity(n, k)).abs();
        if err < best_err {
            best_err = err;
            best_k = k;
        }
    }
    let total = QubitCount::new(n.get() + best_k)?;
    let psi = haar_state(total, rng);
    let traced: Vec<usize> = (n.get()..n.get() + best_k).collect();
    let rho = partial_trace(&psi, &traced)?;
    Ok((rho, traced_exact_mean_purity(n, best_k)))
}

/// Reduced density matrix after tracing out `traced_qubits` from a pure state.
pub fn partial_trace(psi: &PureState, traced_qubits: &[usize]) -> Result<DensityMatrix> {
    let n_total = psi.n.get();
    let mut traced_mask = 0usize;
    for &q in traced_qubits {
        if q >= n_total {
            return Err(Error::QubitIndexOutOfRange(q, n_total));
        }
        traced_mask |= 1 << q;
    }
    let n_traced = traced_mask.count_ones() as usize;
    if n_traced == 0 || n_traced != traced_qubits.len() || n_traced >= n_total {
        return Err(Error::Config(format!(
            "traced set must be a nonempty proper subset of 0..{n_total} without repeats"
        )));
    }
    let n_keep = QubitCount::new(n_total - n_traced)?;
    let kept: Vec<usize> = (0..n_total).filter(|q| traced_mask >> q & 1 == 0).collect();
    let traced: Vec<usize> = (0..n_total).filter(|q| traced_mask >> q & 1 == 1).collect();
    let expand = |kept_bits: usize, env_bits: usize| -> usize {
        let mut full = 0usize;
        for (pos, &q) in kept.iter().enumerate() {
            if kept_bits >> pos & 1 == 1 {
                full |= 1 << q;
            }
        }
        for (pos, &q) in traced.iter().enumerate() {
            if env_bits >> pos & 1 == 1 {
                full |= 1 << q;
            }
        }
        full
    };
    let dim_keep = n_keep.dim();
    let dim_env = 1usize << n_traced;
    let mut m = CMat::zeros((dim_keep, dim_keep));
    for env in 0..dim_env {
        for i in 0..dim_keep {
            let fi = expand(i, env);
            for j in 0..dim_keep {
                let fj = expand(j, env);
                m[(i, j)] += psi.amps[fi] * psi.amps[fj].conj();
            }
        }
    }
    DensityMatrix::new(n_keep, m)
}

/// Project a Hermitian matrix onto the physical cone: clip negative
/// eigenvalues to zero and renormalize the trace. Utility only; the
/// estimators themselves stay unprojected.
pub fn clip_to_physical(n: QubitCount, m: &CMat) -> Result<DensityMatrix> {
    let (vals, vecs) = linalg::hermitian_eigen(m);
    let dim = n.dim();
    let clipped: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Err(Error::NotPsd(vals[0]));
    }
    let mut out = CMat::zeros((dim, dim));
    for k in 0..dim {
        let w = clipped[k] / total;
        if w == 0.0 {
            continue;
        }
        for i in 0..dim {
            for j in 0..dim {
                out[(i, j)] += w * vecs[(i, k)] * vecs[(j, k)].conj();
            }
        }
    }
    DensityMatrix::new(n, out)
}

fn fmt_f64(x: f64) -> String {
    // `{}` prints the shortest representation that round-trips, which keeps
    // saved files byte-stable across runs.
    format!("{x}")
}

/// Write the on-disk density-matrix format: first line N, then 2^N rows of
/// interleaved `re im` pairs.
pub fn save_density_matrix(rho: &DensityMatrix, path: &Path) -> Result<()> {
    std::fs::write(path, density_matrix_to_string(rho))?;
    Ok(())
}

pub fn density_matrix_to_string(rho: &DensityMatrix) -> String {
    let dim = rho.dim();
    let mut out = String::new();
    let _ = writeln!(out, "{}", rho.n.get());
    for i in 0..dim {
        let mut row = Vec::with_capacity(2 * dim);
        for j in 0..dim {
            let z = rho.entries[(i, j)];
            row.push(fmt_f64(z.re));
            row.push(fmt_f64(z.im));
        }
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn load_density_matrix(path: &Path) -> Result<DensityMatrix> {
    let text = std::fs::read_to_string(path)?;
    density_matrix_from_str(&text)
}

pub fn density_matrix_from_str(text: &str) -> Result<DensityMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
    let n: usize = first
        .trim()
        .parse()
        .map_err(|_| Error::Parse { line: 1, msg: format!("bad qubit count {first:?}") })?;
    let n = QubitCount::new(n)?;
    let dim = n.dim();
    let mut m = CMat::zeros((dim, dim));
    for i in 0..dim {
        let (lineno, line) = lines
            .next()
            .ok_or(Error::Parse { line: i + 2, msg: "missing row".into() })?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: lineno + 1, msg: e.to_string() })?;
        if vals.len() != 2 * dim {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("expected {} floats, got {}", 2 * dim, vals.len()),
            });
        }
        for j in 0..dim {
            m[(i, j)] = Complex64::new(vals[2 * j], vals[2 * j + 1]);
        }
    }
    DensityMatrix::new(n, m)
}
