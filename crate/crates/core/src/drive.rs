//! The X/Y rotation family: per-qubit drive parameters, rotating-frame
//! unitaries built from the closed-form eigendecomposition, and the forward
//! measurement map.
//!
//! A constant-phase pulse of amplitude `g`, detuned by `nu`, rotates the qubit
//! about a fixed Bloch axis at the generalized Rabi frequency
//! `lambda = sqrt(g^2 + nu^2)`. Everything here works in the rotating frame at
//! the drive frequency, so the lab frequency and pulse envelope never enter.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::qstate::{BasisIndex, DensityMatrix, QubitCount};

/// Single-qubit drive. `nu = 0` is rejected: the inverse map carries a factor
/// `g/nu`, so resonant drive has no reconstruction.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct QubitDrive {
    g: f64,
    nu: f64,
    phi: f64,
    lambda: f64,
}

impl QubitDrive {
    pub fn new(g: f64, nu: f64, phi: f64) -> Result<Self> {
        if g.is_nan() || g <= 0.0 || !g.is_finite() {
            return Err(Error::BadAmplitude(g));
        }
        if nu == 0.0 || !nu.is_finite() {
            return Err(Error::SingularParameter);
        }
        Ok(QubitDrive { g, nu, phi, lambda: g.hypot(nu) })
    }

    /// The variance-minimizing point `g = sqrt(2) nu`, scaled so the Rabi
    /// frequency equals `lambda`.
    pub fn sweet_spot(lambda: f64) -> Self {
        let nu = lambda / 3.0f64.sqrt();
        QubitDrive { g: 2.0f64.sqrt() * nu, nu, phi: 0.0, lambda }
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `S = (g^2 - 2 nu^2)^2 / (4 g^2 nu^2)`; zero exactly at the sweet spot.
    pub fn s_param(&self) -> f64 {
        let num = self.g * self.g - 2.0 * self.nu * self.nu;
        num * num / (4.0 * self.g * self.g * self.nu * self.nu)
    }

    /// `<s|alpha>` for spin `s` and eigenbranch `alpha` (both +/-1).
    #[inline]
    pub(crate) fn amp(&self, s: i8, alpha: i8) -> Complex64 {
        let ratio = self.nu / self.lambda;
        let half_phi = 0.5 * self.phi;
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        if s < 0 {
            // <down|alpha> = sqrt(1 + alpha nu/lambda) e^{i phi/2} / sqrt 2
            let mag = (1.0 + f64::from(alpha) * ratio).sqrt() * inv_sqrt2;
            Complex64::from_polar(mag, half_phi)
        } else {
            // <up|alpha> = alpha sqrt(1 - alpha nu/lambda) e^{-i phi/2} / sqrt 2
            let mag = (1.0 - f64::from(alpha) * ratio).sqrt() * inv_sqrt2;
            f64::from(alpha) * Complex64::from_polar(mag, -half_phi)
        }
    }

    /// Rotation matrix element `<s| e^{-i H t} |a>`.
    #[inline]
    pub fn u_elem(&self, s: i8, a: i8, t: f64) -> Complex64 {
        let half = Complex64::from_polar(1.0, -0.5 * self.lambda * t);
        let mut out = Complex64::ZERO;
        for alpha in [1i8, -1] {
            let phase = if alpha > 0 { half } else { half.conj() };
            out += phase * self.amp(s, alpha) * self.amp(a, alpha).conj();
        }
        out
    }

    /// 2x2 rotation matrix, basis order (up, down).
    pub fn unitary_2x2(&self, t: f64) -> CMat {
        let mut u = CMat::zeros((2, 2));
        for (row, s) in [(0usize, 1i8), (1, -1)] {
            for (col, a) in [(0usize, 1i8), (1, -1)] {
                u[(row, col)] = self.u_elem(s, a, t);
            }
        }
        u
    }
}

/// The rotation-axis eigenbasis `(|+>, |->)`, each as amplitudes over
/// `(|up>, |down>)`.
pub fn eigenbasis(d: &QubitDrive) -> ([Complex64; 2], [Complex64; 2]) {
    let plus = [d.amp(1, 1), d.amp(-1, 1)];
    let minus = [d.amp(1, -1), d.amp(-1, -1)];
    (plus, minus)
}

/// Per-qubit drives for the whole register.
#[derive(Clone, Debug)]
pub struct DriveSet {
    drives: Vec<QubitDrive>,
    n: QubitCount,
}

impl DriveSet {
    pub fn new(drives: Vec<QubitDrive>) -> Result<Self> {
        let n = QubitCount::new(drives.len())?;
        Ok(DriveSet { drives, n })
    }

    /// All qubits at the sweet spot with unit Rabi frequency (the
    /// dimensionless default).
    pub fn sweet_spot(n: QubitCount) -> Self {
        DriveSet {
            drives: vec![QubitDrive::sweet_spot(1.0); n.get()],
            n,
        }
    }

    /// Sweet-spot drives with per-qubit Rabi frequencies.
    pub fn sweet_spot_with_lambdas(lambdas: &[f64]) -> Result<Self> {
        let n = QubitCount::new(lambdas.len())?;
        Ok(DriveSet {
            drives: lambdas.iter().map(|&l| QubitDrive::sweet_spot(l)).collect(),
            n,
        })
    }

    pub fn n(&self) -> QubitCount {
        self.n
    }

    pub fn qubit(&self, q: usize) -> &QubitDrive {
        &self.drives[q]
    }

    pub fn iter(&self) -> impl Iterator<Item = &QubitDrive> {
        self.drives.iter()
    }

    pub fn min_lambda(&self) -> f64 {
        self.drives.iter().map(|d| d.lambda).fold(f64::INFINITY, f64::min)
    }
}

/// Per-qubit rotation times.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationTimes(pub Vec<f64>);

impl RotationTimes {
    pub fn zero(n: QubitCount) -> Self {
        RotationTimes(vec![0.0; n.get()])
    }

    /// All qubits rotated for one common time (the limited-control mode).
    pub fn uniform(n: QubitCount, t: f64) -> Self {
        RotationTimes(vec![t; n.get()])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Full 2^N x 2^N rotation, the tensor product of the per-qubit rotations.
pub fn unitary(ds: &DriveSet, t: &RotationTimes) -> CMat {
    assert_eq!(ds.n().get(), t.len(), "drive/time dimension mismatch");
    let mut acc = CMat::eye(1);
    for (q, d) in ds.iter().enumerate() {
        acc = crate::linalg::kron(&d.unitary_2x2(t.0[q]), &acc);
    }
    acc
}

/// Forward-map element `M_{s,a,b}(t)`: the coefficient of `rho_ab` in the
/// probability of outcome `s`. Factorizes over qubits.
pub fn forward_map(
    ds: &DriveSet,
    t: &RotationTimes,
    s: BasisIndex,
    a: BasisIndex,
    b: BasisIndex,
) -> Complex64 {
    let mut prod = Complex64::ONE;
    for (q, d) in ds.iter().enumerate() {
        let tq = t.0[q];
        let u_sa = d.u_elem(s.spin(q), a.spin(q), tq);
        let u_sb = d.u_elem(s.spin(q), b.spin(q), tq);
        prod *= u_sa * u_sb.conj();
    }
    prod
}

/// Apply the single-qubit map `rho -> (I (x) u) rho (I (x) u)^dag` in place on
/// qubit `q` of a dense 2^N x 2^N matrix.
fn apply_single_qubit(m: &mut CMat, u: &CMat, q: usize, n: usize) {
    let dim = 1usize << n;
    let bit = 1usize << q;
    // rows
    for base in 0..dim {
        if base & bit != 0 {
            continue;
        }
        let hi = base | bit;
        for col in 0..dim {
            let a = m[(base, col)];
            let b = m[(hi, col)];
            m[(base, col)] = u[(0, 0)] * a + u[(0, 1)] * b;
            m[(hi, col)] = u[(1, 0)] * a + u[(1, 1)] * b;
        }
    }
    // columns (right-multiply by u^dag)
    for base in 0..dim {
        if base & bit != 0 {
            continue;
        }
        let hi = base | bit;
        for row in 0..dim {
            let a = m[(row, base)];
            let b = m[(row, hi)];
            m[(row, base)] = a * u[(0, 0)].conj() + b * u[(0, 1)].conj();
            m[(row, hi)] = a * u[(1, 0)].conj() + b * u[(1, 1)].conj();
        }
    }
}

/// Outcome distribution `P_s(t) = <s| U rho U^dag |s>`, evaluated by applying
/// the per-qubit rotations directly to the density matrix. Entries within
/// -1e-12 of zero are clamped; the vector is renormalized to unit sum.
pub fn outcome_probabilities(
    ds: &DriveSet,
    t: &RotationTimes,
    rho: &DensityMatrix,
) -> Result<Vec<f64>> {
    let n = ds.n().get();
    if rho.n() != ds.n() {
        return Err(Error::DimensionMismatch { expected: ds.n().dim(), got: rho.dim() });
    }
    if t.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: t.len() });
    }
    let mut m = rho.entries().clone();
    for (q, d) in ds.iter().enumerate() {
        let u = d.unitary_2x2(t.0[q]);
        apply_single_qubit(&mut m, &u, q, n);
    }
    let dim = rho.dim();
    let mut probs = Vec::with_capacity(dim);
    for s in 0..dim {
        let p = m[(s, s)].re;
        if p < -1e-12 {
            return Err(Error::NegativeProbability { index: s, value: p });
        }
        probs.push(p.max(0.0));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::BadProbabilities(total));
    }
    for p in &mut probs {
        *p /= total;
    }
    Ok(probs)
}

/// Exact single-unitary expectation of the estimator observable:
/// `r_ab(t) = sum_s Minv_{a,b,s}(t) P_s(t)`, as a full matrix.
pub fn expected_observable(
    ds: &DriveSet,
    t: &RotationTimes,
    rho: &DensityMatrix,
) -> Result<CMat> {
    let probs = outcome_probabilities(ds, t, rho)?;
    Ok(crate::recon::r_matrix(ds, t, &probs))
}
