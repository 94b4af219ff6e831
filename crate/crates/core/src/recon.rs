//! The inverse map, Fourier-polynomial bookkeeping, and exact averaging over
//! rotation times.
//!
//! Per qubit, every quantity in the estimator is a short Fourier polynomial
//! `sum_k c_k e^{i k lambda t}`. The forward and inverse map factors live on
//! harmonics `|k| <= 1`, their compositions on `|k| <= 2`, and products of two
//! compositions (needed by the variance contractions) on `|k| <= 4`. Averaging
//! over `t` uniform on `[0, T]` multiplies harmonic `k` by
//! `(e^{i k lambda T} - 1)/(i k lambda T)`; the infinite window keeps only
//! `k = 0`. That turns the tomography identity into exact coefficient algebra,
//! with no quadrature anywhere in the primary path.

use num_complex::Complex64;

use crate::drive::{DriveSet, QubitDrive, RotationTimes};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::qstate::BasisIndex;

/// Largest harmonic order carried by [`HarmonicScalar`].
pub const MAX_HARMONIC: i32 = 4;
const NH: usize = (2 * MAX_HARMONIC + 1) as usize;

/// Truncation guard: products must never push weight beyond `MAX_HARMONIC`.
const OVERFLOW_TOL: f64 = 1e-12;

/// Averaging window for rotation times.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum AveragingWindow {
    /// Exact zero-frequency projection.
    Infinite,
    /// Uniform sampling over `[0, T]`.
    Finite(f64),
}

/// Average of `e^{i k lambda t}` for `t` uniform on the window.
pub fn harmonic_average_factor(k: i32, lambda: f64, window: AveragingWindow) -> Complex64 {
    if k == 0 {
        return Complex64::ONE;
    }
    match window {
        AveragingWindow::Infinite => Complex64::ZERO,
        AveragingWindow::Finite(t_max) => {
            let x = Complex64::new(0.0, f64::from(k) * lambda * t_max);
            (x.exp() - Complex64::ONE) / x
        }
    }
}

/// A single-qubit Fourier polynomial `sum_k c_k e^{i k lambda t}`,
/// `|k| <= MAX_HARMONIC`.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicScalar {
    c: [Complex64; NH],
}

impl HarmonicScalar {
    pub fn zero() -> Self {
        HarmonicScalar { c: [Complex64::ZERO; NH] }
    }

    pub fn constant(v: Complex64) -> Self {
        let mut h = Self::zero();
        h.c[MAX_HARMONIC as usize] = v;
        h
    }

    #[inline]
    pub fn coeff(&self, k: i32) -> Complex64 {
        debug_assert!(k.abs() <= MAX_HARMONIC);
        self.c[(k + MAX_HARMONIC) as usize]
    }

    #[inline]
    pub fn add_coeff(&mut self, k: i32, v: Complex64) {
        self.c[(k + MAX_HARMONIC) as usize] += v;
    }

    pub fn add(&self, other: &HarmonicScalar) -> HarmonicScalar {
        let mut out = self.clone();
        for (o, v) in out.c.iter_mut().zip(other.c.iter()) {
            *o += v;
        }
        out
    }

    pub fn scale(&self, f: Complex64) -> HarmonicScalar {
        let mut out = self.clone();
        for o in out.c.iter_mut() {
            *o *= f;
        }
        out
    }

    /// Product of representations. Fails if any weight would land beyond the
    /// supported harmonic order.
    pub fn mul(&self, other: &HarmonicScalar) -> Result<HarmonicScalar> {
        let mut out = Self::zero();
        for (ia, &a) in self.c.iter().enumerate() {
            if a == Complex64::ZERO {
                continue;
            }
            for (ib, &b) in other.c.iter().enumerate() {
                if b == Complex64::ZERO {
                    continue;
                }
                let k = (ia as i32 - MAX_HARMONIC) + (ib as i32 - MAX_HARMONIC);
                let v = a * b;
                if k.abs() > MAX_HARMONIC {
                    if v.norm() > OVERFLOW_TOL {
                        return Err(Error::HarmonicOverflow(v.norm(), MAX_HARMONIC));
                    }
                    continue;
                }
                out.c[(k + MAX_HARMONIC) as usize] += v;
            }
        }
        Ok(out)
    }

    /// Complex conjugate of the represented function: `c_k -> conj(c_{-k})`.
    pub fn conj(&self) -> HarmonicScalar {
        let mut out = Self::zero();
        for k in -MAX_HARMONIC..=MAX_HARMONIC {
            out.c[(k + MAX_HARMONIC) as usize] = self.coeff(-k).conj();
        }
        out
    }

    /// Point evaluation at rotation time `t`.
    pub fn eval(&self, lambda: f64, t: f64) -> Complex64 {
        let mut out = Complex64::ZERO;
        for k in -MAX_HARMONIC..=MAX_HARMONIC {
            let v = self.coeff(k);
            if v == Complex64::ZERO {
                continue;
            }
            out += v * Complex64::from_polar(1.0, f64::from(k) * lambda * t);
        }
        out
    }

    /// Window average.
    pub fn average(&self, lambda: f64, window: AveragingWindow) -> Complex64 {
        match window {
            AveragingWindow::Infinite => self.coeff(0),
            AveragingWindow::Finite(_) => {
                let mut out = Complex64::ZERO;
                for k in -MAX_HARMONIC..=MAX_HARMONIC {
                    let v = self.coeff(k);
                    if v == Complex64::ZERO {
                        continue;
                    }
                    out += v * harmonic_average_factor(k, lambda, window);
                }
                out
            }
        }
    }

    /// Largest harmonic with nonzero weight.
    pub fn degree(&self) -> i32 {
        (0..=MAX_HARMONIC)
            .rev()
            .find(|&k| self.coeff(k).norm() > 0.0 || self.coeff(-k).norm() > 0.0)
            .unwrap_or(0)
    }
}

/// Product of per-qubit harmonic polynomials, each tied to its own Rabi
/// frequency: the natural representation of the composed tensors, whose
/// window average factorizes qubit by qubit. At the infinite window the
/// average is the product of the per-qubit zero-harmonic coefficients.
#[derive(Clone, Debug)]
pub struct HarmonicTensor {
    factors: Vec<(HarmonicScalar, f64)>,
}

impl HarmonicTensor {
    pub fn new() -> Self {
        HarmonicTensor { factors: Vec::new() }
    }

    pub fn push(&mut self, factor: HarmonicScalar, lambda: f64) {
        self.factors.push((factor, lambda));
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Value at a rotation-time vector (one entry per qubit).
    pub fn eval(&self, times: &[f64]) -> Complex64 {
        debug_assert_eq!(times.len(), self.factors.len());
        self.factors
            .iter()
            .zip(times.iter())
            .map(|((f, lambda), &t)| f.eval(*lambda, t))
            .product()
    }

    /// Window average; the per-qubit times are independent, so this is the
    /// product of per-qubit averages.
    pub fn average(&self, window: AveragingWindow) -> Complex64 {
        let mut prod = Complex64::ONE;
        for (f, lambda) in &self.factors {
            prod *= f.average(*lambda, window);
            if prod == Complex64::ZERO {
                break;
            }
        }
        prod
    }
}

impl Default for HarmonicTensor {
    fn default() -> Self {
        Self::new()
    }
}

/// Per-qubit forward-map factor `m(s, i, j; t) = u(s,i) conj(u(s,j))` as a
/// harmonic polynomial (`|k| <= 1`).
pub fn m_factor(d: &QubitDrive, s: i8, i: i8, j: i8) -> HarmonicScalar {
    let mut out = HarmonicScalar::zero();
    for alpha in [1i8, -1] {
        for alpha_p in [1i8, -1] {
            // e^{-i lambda (alpha - alpha') t / 2} = z^{-(alpha - alpha')/2}
            let k = -i32::from(alpha - alpha_p) / 2;
            let coeff = d.amp(s, alpha)
                * d.amp(i, alpha).conj()
                * d.amp(s, alpha_p).conj()
                * d.amp(j, alpha_p);
            out.add_coeff(k, coeff);
        }
    }
    out
}

/// Per-qubit inverse-map factor (`|k| <= 1`):
///
/// `e^{i phi (b-a)/2} [ d_{2s}^{a+b} - (s/2)( (g/nu) d_a^{-b}`
/// `  - e^{ i lambda t} b sqrt((lambda + b nu)/(lambda + a nu))`
/// `  - e^{-i lambda t} a sqrt((lambda + a nu)/(lambda + b nu)) ) ]`
pub fn minv_factor(d: &QubitDrive, a: i8, b: i8, s: i8) -> HarmonicScalar {
    let lam = d.lambda();
    let nu = d.nu();
    let g = d.g();
    let (af, bf, sf) = (f64::from(a), f64::from(b), f64::from(s));
    let mut out = HarmonicScalar::zero();
    if a == b && b == s {
        out.add_coeff(0, Complex64::ONE);
    }
    if a == -b {
        out.add_coeff(0, Complex64::new(-(sf / 2.0) * (g / nu), 0.0));
    }
    let up = (lam + bf * nu) / (lam + af * nu);
    out.add_coeff(1, Complex64::new((sf / 2.0) * bf * up.sqrt(), 0.0));
    out.add_coeff(-1, Complex64::new((sf / 2.0) * af * (1.0 / up).sqrt(), 0.0));
    let phase = Complex64::from_polar(1.0, d.phi() * f64::from(b - a) / 2.0);
    out.scale(phase)
}

/// Per-qubit composition `i(a,b,i,j; t) = sum_s minv(a,b,s) m(s,i,j)`
/// (`|k| <= 2`).
pub fn i_factor(d: &QubitDrive, a: i8, b: i8, i: i8, j: i8) -> HarmonicScalar {
    let mut out = HarmonicScalar::zero();
    for s in [1i8, -1] {
        out = out.add(&minv_factor(d, a, b, s).mul(&m_factor(d, s, i, j)).expect("degree 2"));
    }
    out
}

/// Per-qubit triple composition
/// `j(a,b,c,e,i,j; t) = sum_s minv(a,b,s) minv(c,e,s) m(s,i,j)`.
///
/// The raw product reaches harmonic 3, but the odd-in-s structure of the
/// outermost harmonics cancels those terms in the spin sum; this is checked
/// and the result is certified to `|k| <= 2`.
pub fn j_factor(d: &QubitDrive, a: i8, b: i8, c: i8, e: i8, i: i8, j: i8) -> Result<HarmonicScalar> {
    let mut out = HarmonicScalar::zero();
    for s in [1i8, -1] {
        let two = minv_factor(d, a, b, s).mul(&minv_factor(d, c, e, s))?;
        out = out.add(&two.mul(&m_factor(d, s, i, j))?);
    }
    for k in [3i32, -3, 4, -4] {
        let residue = out.coeff(k).norm();
        if residue > 1e-10 {
            return Err(Error::HarmonicOverflow(residue, 2));
        }
    }
    Ok(out)
}

/// Inverse-map element `Minv_{a,b,s}(t)`; factorizes over qubits.
pub fn inverse_map(
    ds: &DriveSet,
    t: &RotationTimes,
    a: BasisIndex,
    b: BasisIndex,
    s: BasisIndex,
) -> Complex64 {
    let mut prod = Complex64::ONE;
    for (q, d) in ds.iter().enumerate() {
        prod *= minv_factor(d, a.spin(q), b.spin(q), s.spin(q)).eval(d.lambda(), t.0[q]);
    }
    prod
}

/// Pointwise composition `I_ab^{ij}(t) = sum_s Minv_{a,b,s}(t) M_{s,i,j}(t)`.
pub fn i_tensor(
    ds: &DriveSet,
    t: &RotationTimes,
    a: BasisIndex,
    b: BasisIndex,
    i: BasisIndex,
    j: BasisIndex,
) -> Complex64 {
    let mut prod = Complex64::ONE;
    for (q, d) in ds.iter().enumerate() {
        prod *= i_factor(d, a.spin(q), b.spin(q), i.spin(q), j.spin(q)).eval(d.lambda(), t.0[q]);
    }
    prod
}

/// The composition as a [`HarmonicTensor`] over the register.
pub fn i_tensor_harmonics(
    ds: &DriveSet,
    a: BasisIndex,
    b: BasisIndex,
    i: BasisIndex,
    j: BasisIndex,
) -> HarmonicTensor {
    let mut tensor = HarmonicTensor::new();
    for (q, d) in ds.iter().enumerate() {
        tensor.push(i_factor(d, a.spin(q), b.spin(q), i.spin(q), j.spin(q)), d.lambda());
    }
    tensor
}

/// Window-averaged composition. At the infinite window this is exactly the
/// Kronecker pair `delta_a^i delta_b^j`; at finite `T` the off-target weight
/// decays as `1/(lambda T)`.
pub fn i_tensor_avg(
    ds: &DriveSet,
    window: AveragingWindow,
    a: BasisIndex,
    b: BasisIndex,
    i: BasisIndex,
    j: BasisIndex,
) -> Complex64 {
    i_tensor_harmonics(ds, a, b, i, j).average(window)
}

/// Window-averaged triple composition
/// `Jbar_{a,b,c,e}^{i,j} = < sum_s Minv_{abs} Minv_{ces} M_{s,i,j} >`.
#[allow(clippy::too_many_arguments)]
pub fn j_tensor_avg(
    ds: &DriveSet,
    window: AveragingWindow,
    a: BasisIndex,
    b: BasisIndex,
    c: BasisIndex,
    e: BasisIndex,
    i: BasisIndex,
    j: BasisIndex,
) -> Result<Complex64> {
    let mut tensor = HarmonicTensor::new();
    for (q, d) in ds.iter().enumerate() {
        let f = j_factor(d, a.spin(q), b.spin(q), c.spin(q), e.spin(q), i.spin(q), j.spin(q))?;
        tensor.push(f, d.lambda());
    }
    Ok(tensor.average(window))
}

/// Single-rotation estimate of `rho_ab` from observed outcome frequencies.
pub fn r_observable(
    ds: &DriveSet,
    t: &RotationTimes,
    a: BasisIndex,
    b: BasisIndex,
    empirical_freqs: &[f64],
) -> Result<Complex64> {
    let dim = ds.n().dim();
    if empirical_freqs.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: empirical_freqs.len() });
    }
    let total: f64 = empirical_freqs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::BadProbabilities(total));
    }
    let mut acc = Complex64::ZERO;
    for (s, &f) in empirical_freqs.iter().enumerate() {
        if f == 0.0 {
            continue;
        }
        acc += f * inverse_map(ds, t, a, b, BasisIndex(s));
    }
    Ok(acc)
}

/// All matrix elements of the single-rotation estimate at once. The lower
/// triangle is the exact conjugate mirror of the upper one, so the returned
/// matrix is Hermitian to the last bit.
pub fn r_matrix(ds: &DriveSet, t: &RotationTimes, freqs: &[f64]) -> CMat {
    let n = ds.n().get();
    let dim = 1usize << n;
    // cache per-qubit inverse factors evaluated at t
    let mut cache = vec![[[Complex64::ZERO; 2]; 4]; n]; // [q][(a,b) 2-bit][(s) 1-bit]
    for (q, d) in ds.iter().enumerate() {
        for (ai, a) in [1i8, -1].into_iter().enumerate() {
            for (bi, b) in [1i8, -1].into_iter().enumerate() {
                for (si, s) in [1i8, -1].into_iter().enumerate() {
                    cache[q][(ai << 1) | bi][si] =
                        minv_factor(d, a, b, s).eval(d.lambda(), t.0[q]);
                }
            }
        }
    }
    let mut out = CMat::zeros((dim, dim));
    for a in 0..dim {
        for b in a..dim {
            let mut acc = Complex64::ZERO;
            for (s, &f) in freqs.iter().enumerate() {
                if f == 0.0 {
                    continue;
                }
                let mut prod = Complex64::ONE;
                for q in 0..n {
                    let key = (((a >> q) & 1) << 1) | ((b >> q) & 1);
                    prod *= cache[q][key][(s >> q) & 1];
                }
                acc += f * prod;
            }
            out[(a, b)] = acc;
            if a != b {
                out[(b, a)] = acc.conj();
            }
        }
    }
    out
}
