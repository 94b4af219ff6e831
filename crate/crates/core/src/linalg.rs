//! Small dense complex linear-algebra helpers: Kronecker products, a Jacobi
//! eigensolver for Hermitian matrices, a Cholesky-based PSD test, and direct
//! solvers for the small systems used by the oracles.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = Array2<Complex64>;
pub type CVec = Array1<Complex64>;

/// Kronecker product `a (x) b`; `b` indexes the low bits of the result.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = CMat::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            if aij == Complex64::ZERO {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Conjugate transpose.
pub fn adjoint(m: &CMat) -> CMat {
    let (r, c) = m.dim();
    let mut out = CMat::zeros((c, r));
    for i in 0..r {
        for j in 0..c {
            out[(j, i)] = m[(i, j)].conj();
        }
    }
    out
}

/// Largest Hermiticity violation `max |m_ij - conj(m_ji)|`.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// Attempt a Cholesky factorization of `m + shift*I`. Success certifies that
/// the smallest eigenvalue of `m` exceeds `-shift`.
pub fn cholesky_shifted_ok(m: &CMat, shift: f64) -> bool {
    let n = m.nrows();
    let mut l = CMat::zeros((n, n));
    for j in 0..n {
        let mut diag = m[(j, j)].re + shift;
        for k in 0..j {
            diag -= l[(j, k)].norm_sqr();
        }
        if diag <= 0.0 || !diag.is_finite() {
            return false;
        }
        let dj = diag.sqrt();
        l[(j, j)] = Complex64::new(dj, 0.0);
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / dj;
        }
    }
    true
}

/// Eigenvalues and eigenvectors of a Hermitian matrix by cyclic complex
/// Jacobi rotations. Returns eigenvalues in ascending order with eigenvectors
/// as matrix columns. Intended for the desk-scale dimensions used here.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = CMat::eye(n);
    let tol = 1e-14 * frobenius(m).max(1.0);
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() < tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm() < tol * 1e-2 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Phase so the pivot becomes real, then a real Jacobi rotation:
                // R = [[c, -s*phase], [s*conj(phase), c]] zeroes a_pq when
                // tan(2 theta) = 2|a_pq| / (a_pp - a_qq).
                let phase = apq / apq.norm();
                let g = apq.norm();
                let theta = 0.5 * (2.0 * g).atan2(app - aqq);
                let (c, s) = (theta.cos(), theta.sin());
                // A <- A R (columns), then A <- R^H A (rows); V <- V R.
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * aip + s * phase.conj() * aiq;
                    a[(i, q)] = -s * phase * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = c * apj + s * phase * aqj;
                    a[(q, j)] = -s * phase.conj() * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip + s * phase.conj() * viq;
                    v[(i, q)] = -s * phase * vip + c * viq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let evs: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| evs[i].partial_cmp(&evs[j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| evs[i]).collect();
    let mut vecs = CMat::zeros((n, n));
    for (newc, &oldc) in order.iter().enumerate() {
        for r in 0..n {
            vecs[(r, newc)] = v[(r, oldc)];
        }
    }
    (vals, vecs)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigen(m).0[0]
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Solve the square complex system `a x = b` by Gaussian elimination with
/// partial pivoting.
pub fn solve_dense(a: &CMat, b: &CVec) -> Result<CVec> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::NotSquare(a.nrows(), a.ncols()));
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    let mut m = a.clone();
    let mut rhs = b.clone();
    for col in 0..n {
        let (piv, pmag) = (col..n)
            .map(|r| (r, m[(r, col)].norm()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if pmag < 1e-13 {
            return Err(Error::SingularSystem);
        }
        if piv != col {
            for j in 0..n {
                let tmp = m[(col, j)];
                m[(col, j)] = m[(piv, j)];
                m[(piv, j)] = tmp;
            }
            let tmp = rhs[col];
            rhs[col] = rhs[piv];
            rhs[piv] = tmp;
        }
        let d = m[(col, col)];
        for r in (col + 1)..n {
            let f = m[(r, col)] / d;
            if f == Complex64::ZERO {
                continue;
            }
            for j in col..n {
                let v = m[(col, j)];
                m[(r, j)] -= f * v;
            }
            let v = rhs[col];
            rhs[r] -= f * v;
        }
    }
    let mut x = CVec::zeros(n);
    for r in (0..n).rev() {
        let mut s = rhs[r];
        for j in (r + 1)..n {
            s -= m[(r, j)] * x[j];
        }
        x[r] = s / m[(r, r)];
    }
    Ok(x)
}

/// Minimum-norm solution of the underdetermined system `a x = b`
/// (rows <= columns), via `x = a^H (a a^H)^{-1} b`.
pub fn solve_min_norm(a: &CMat, b: &CVec) -> Result<CVec> {
    let (rows, cols) = a.dim();
    if b.len() != rows {
        return Err(Error::DimensionMismatch { expected: rows, got: b.len() });
    }
    let ah = adjoint(a);
    let gram = a.dot(&ah); // rows x rows
    let y = solve_dense(&gram, b)?;
    let mut x = CVec::zeros(cols);
    for c in 0..cols {
        let mut s = Complex64::ZERO;
        for r in 0..rows {
            s += ah[(c, r)] * y[r];
        }
        x[c] = s;
    }
    Ok(x)
}
