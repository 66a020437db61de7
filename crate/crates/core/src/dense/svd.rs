//! Singular value decomposition by one-sided Jacobi rotations.
//!
//! This is the reference against which the faster compression routines
//! are judged, so it favors accuracy and simplicity: a Householder QR
//! reduces the problem to a square triangular factor, then Hestenes
//! rotations orthogonalize its columns.

use super::lowrank::LowRankFactor;
use super::qr::qr;
use super::DenseMatrix;

/// Full thin SVD `A = U diag(s) Vᵀ` with singular values sorted descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    pub v: DenseMatrix,
}

const MAX_SWEEPS: usize = 60;

pub fn svd(a: &DenseMatrix) -> Svd {
    let (m, n) = a.shape();
    if m < n {
        let t = svd(&a.transpose());
        return Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        };
    }
    if n == 0 {
        return Svd {
            u: DenseMatrix::zeros(m, 0),
            s: Vec::new(),
            v: DenseMatrix::zeros(0, 0),
        };
    }
    // m >= n: A = Q R, then Jacobi on R (n×n).
    let f = qr(a);
    let mut w = f.r;
    let mut v = DenseMatrix::identity(n);
    let eps = f64::EPSILON;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (cp, cq) = w.two_cols_mut(p, q);
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for (x, y) in cp.iter().zip(cq.iter()) {
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let xv = *x;
                    let yv = *y;
                    *x = c * xv - s * yv;
                    *y = s * xv + c * yv;
                }
                let (vp, vq) = v.two_cols_mut(p, q);
                for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
                    let xv = *x;
                    let yv = *y;
                    *x = c * xv - s * yv;
                    *y = s * xv + c * yv;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<(f64, usize)> = (0..n)
        .map(|j| (w.col(j).iter().map(|x| x * x).sum::<f64>().sqrt(), j))
        .collect();
    // Stable sort keeps the result deterministic for ties.
    sv.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut u_small = DenseMatrix::zeros(n, n);
    let mut v_sorted = DenseMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &(sigma, j)) in sv.iter().enumerate() {
        s.push(sigma);
        if sigma > 0.0 {
            for i in 0..n {
                u_small[(i, k)] = w[(i, j)] / sigma;
            }
        }
        v_sorted.col_mut(k).copy_from_slice(v.col(j));
    }
    Svd {
        u: f.q.matmul(&u_small),
        s,
        v: v_sorted,
    }
}

/// Rank of the spectral truncation: smallest r with `s[r] <= tol * s[0]`.
pub(crate) fn truncation_rank(s: &[f64], tol: f64) -> usize {
    match s.first() {
        None => 0,
        Some(&0.0) => 0,
        Some(&s0) => s.iter().take_while(|&&x| x > tol * s0).count(),
    }
}

/// Truncated SVD as a low-rank factor `U·Vᵀ` with the singular values
/// folded into `U`. The spectral error is at most `tol · σ₁`.
pub fn truncated_svd(m: &DenseMatrix, tol: f64) -> LowRankFactor {
    let (rows, cols) = m.shape();
    let d = svd(m);
    let r = truncation_rank(&d.s, tol);
    let mut u = DenseMatrix::zeros(rows, r);
    for k in 0..r {
        let src = d.u.col(k);
        for (dst, x) in u.col_mut(k).iter_mut().zip(src) {
            *dst = x * d.s[k];
        }
    }
    let v = DenseMatrix::from_fn(cols, r, |i, k| d.v[(i, k)]);
    LowRankFactor::new(u, v, tol)
}
