//! Small statistics helpers shared by the estimators, oracles, and sweeps.

use crate::error::{Error, Result};

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Standard error of the mean.
pub fn standard_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_slope(&lx, &ly)
}

/// Least-squares slope of `y` against `x`.
pub fn linear_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let mx = mean(xs);
    let my = mean(ys);
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys.iter()) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Weighted linear least squares `y ~ X beta` with per-row weights
/// `w_i = 1/sigma_i^2`. Returns the coefficients, their standard errors, and
/// the condition number of the weighted normal matrix.
pub struct FitResult {
    pub coeffs: Vec<f64>,
    pub std_errs: Vec<f64>,
    pub condition: f64,
}

pub fn weighted_least_squares(rows: &[Vec<f64>], y: &[f64], w: &[f64]) -> Result<FitResult> {
    let m = rows.len();
    let p = rows[0].len();
    if y.len() != m || w.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: y.len().min(w.len()) });
    }
    // normal equations: (X^T W X) beta = X^T W y
    let mut xtx = vec![vec![0.0f64; p]; p];
    let mut xty = vec![0.0f64; p];
    for (row, (&yi, &wi)) in rows.iter().zip(y.iter().zip(w.iter())) {
        for a in 0..p {
            xty[a] += wi * row[a] * yi;
            for b in 0..p {
                xtx[a][b] += wi * row[a] * row[b];
            }
        }
    }
    let (inv, condition) = invert_spd(&xtx)?;
    if condition > 1e12 {
        return Err(Error::GridTooDegenerate(condition));
    }
    let mut coeffs = vec![0.0f64; p];
    for a in 0..p {
        for b in 0..p {
            coeffs[a] += inv[a][b] * xty[b];
        }
    }
    // with w = 1/sigma^2 the coefficient covariance is (X^T W X)^{-1}
    let std_errs = (0..p).map(|a| inv[a][a].max(0.0).sqrt()).collect();
    Ok(FitResult { coeffs, std_errs, condition })
}

/// Invert a small symmetric positive-definite matrix by Gauss-Jordan,
/// returning the inverse and a crude condition estimate from the diagonal
/// pivot spread.
fn invert_spd(a: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, f64)> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.iter().map(|r| {
        let mut row = r.clone();
        row.resize(2 * n, 0.0);
        row
    }).collect();
    for i in 0..n {
        m[i][n + i] = 1.0;
    }
    let mut min_piv = f64::INFINITY;
    let mut max_piv = 0.0f64;
    for col in 0..n {
        let (piv, pmag) = (col..n)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if pmag == 0.0 || !pmag.is_finite() {
            return Err(Error::SingularSystem);
        }
        min_piv = min_piv.min(pmag);
        max_piv = max_piv.max(pmag);
        m.swap(col, piv);
        let d = m[col][col];
        for v in m[col].iter_mut() {
            *v /= d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r][col];
            if f == 0.0 {
                continue;
            }
            for j in 0..2 * n {
                let v = m[col][j];
                m[r][j] -= f * v;
            }
        }
    }
    let inv: Vec<Vec<f64>> = m.into_iter().map(|row| row[n..].to_vec()).collect();
    Ok((inv, max_piv / min_piv))
}

/// Deterministic 64-bit stream derivation (splitmix64 chain). Used to give
/// every work item its own seed so parallel schedules cannot change results.
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    let mut z = master ^ splitmix64(tag.wrapping_add(0x9e37_79b9_7f4a_7c15));
    z = splitmix64(z);
    splitmix64(z)
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut x = z;
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// FNV-1a over bytes; used for provenance hashes in CSV headers.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Regularized lower incomplete gamma P(a, x), via series / continued
/// fraction. Used for chi-square p-values in the statistical test suites.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x < 0.0 || a <= 0.0 {
        return f64::NAN;
    }
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        // series expansion
        let mut sum = 1.0 / a;
        let mut term = sum;
        let mut ap = a;
        for _ in 0..500 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-15 {
                break;
            }
        }
        (sum * (-x + a * x.ln() - ln_gamma(a)).exp()).clamp(0.0, 1.0)
    } else {
        // continued fraction for Q(a, x)
        let mut b = x + 1.0 - a;
        let mut c = 1e300;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < 1e-300 {
                d = 1e-300;
            }
            c = b + an / c;
            if c.abs() < 1e-300 {
                c = 1e-300;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-15 {
                break;
            }
        }
        let q = (-x + a * x.ln() - ln_gamma(a)).exp() * h;
        (1.0 - q).clamp(0.0, 1.0)
    }
}

/// Chi-square upper-tail p-value with `dof` degrees of freedom.
pub fn chi_square_pvalue(stat: f64, dof: usize) -> f64 {
    1.0 - gamma_p(dof as f64 / 2.0, stat / 2.0)
}

/// Lanczos approximation of ln Gamma.
pub fn ln_gamma(x: f64) -> f64 {
    const G: [f64; 6] = [
        76.180_091_729_471_46,
        -86.505_320_329_416_77,
        24.014_098_240_830_91,
        -1.231_739_572_450_155,
        0.120_865_097_386_617_5e-2,
        -0.539_523_938_495_3e-5,
    ];
    let mut y = x;
    let tmp = x + 5.5;
    let tmp = tmp - (x + 0.5) * tmp.ln();
    let mut ser = 1.000_000_000_190_015;
    for g in G {
        y += 1.0;
        ser += g / y;
    }
    -tmp + (2.506_628_274_631_000_5 * ser / x).ln()
}

/// One-sample Kolmogorov-Smirnov statistic against Uniform(0,1).
pub fn ks_statistic_uniform(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((x - lo).abs()).max((hi - x).abs());
    }
    d
}
