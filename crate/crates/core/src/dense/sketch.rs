//! Randomized range finding from matrix-vector products only.

use rand::Rng;

use super::qr::orthonormal_complement;
use super::svd::{svd, truncation_rank};
use super::{DenseMatrix, LowRankFactor};

#[derive(Debug, Clone, Copy)]
pub struct SketchOptions {
    pub tol: f64,
    /// Size of the first sample; later rounds add `block` columns.
    pub oversample: usize,
    pub block: usize,
    pub power_iters: usize,
    pub max_rank: Option<usize>,
}

impl SketchOptions {
    /// Defaults for a caller-supplied rank guess: `guess + 10` initial
    /// probes, blocks of 8, one power iteration.
    pub fn with_guess(tol: f64, rank_guess: usize) -> Self {
        Self {
            tol,
            oversample: rank_guess + 10,
            block: 8,
            power_iters: 1,
            max_rank: None,
        }
    }
}

/// Builds `M ≈ U Vᵀ` for an m×n operator given only `X ↦ M X` and
/// `X ↦ Mᵀ X`. The generator is explicit so runs are reproducible.
pub fn randomized_range<R: Rng + ?Sized>(
    apply: impl Fn(&DenseMatrix) -> DenseMatrix,
    apply_t: impl Fn(&DenseMatrix) -> DenseMatrix,
    m: usize,
    n: usize,
    opts: &SketchOptions,
    rng: &mut R,
) -> LowRankFactor {
    let cap = opts.max_rank.unwrap_or(usize::MAX).min(m.min(n));
    let mut q = DenseMatrix::zeros(m, 0);
    let mut norm_est = 0.0_f64;
    let mut first = true;
    let mut converged = false;
    while q.n_cols() < cap {
        let k = if first { opts.oversample.max(1) } else { opts.block.max(1) };
        let omega = DenseMatrix::random_normal(n, k, rng);
        let mut y = apply(&omega);
        let sample_max = max_col_norm(&y);
        norm_est = norm_est.max(sample_max);
        first = false;
        if norm_est == 0.0 {
            converged = true;
            break;
        }
        let resid = deflate(&q, &y);
        if max_col_norm(&resid) <= opts.tol * norm_est {
            converged = true;
            break;
        }
        for _ in 0..opts.power_iters {
            let yq = orthonormal_complement(&q, &y, 1e-13 * max_col_norm(&y));
            if yq.n_cols() == 0 {
                break;
            }
            let z = apply_t(&yq);
            let zq = orthonormal_complement(&DenseMatrix::zeros(n, 0), &z, 1e-13 * max_col_norm(&z));
            y = apply(&zq);
        }
        let y = deflate(&q, &y);
        let fresh = orthonormal_complement(&q, &y, 1e-13 * max_col_norm(&y).max(f64::MIN_POSITIVE));
        if fresh.n_cols() == 0 {
            converged = true;
            break;
        }
        q = q.hcat(&fresh);
    }
    if q.n_cols() >= m.min(n) {
        converged = true;
    }
    if q.n_cols() == 0 {
        let mut f = LowRankFactor::zero(m, n);
        f.tol = opts.tol;
        f.converged = converged;
        return f;
    }
    // M ≈ Q (Qᵀ M) = Q Bᵀ... with B = Mᵀ Q (n×r); truncate through its SVD.
    let b = apply_t(&q);
    let d = svd(&b.transpose());
    let r = truncation_rank(&d.s, opts.tol);
    let w = DenseMatrix::from_fn(d.u.n_rows(), r, |i, j| d.u[(i, j)] * d.s[j]);
    let v = DenseMatrix::from_fn(n, r, |i, j| d.v[(i, j)]);
    let mut f = LowRankFactor::new(q.matmul(&w), v, opts.tol);
    f.converged = converged;
    f
}

fn deflate(q: &DenseMatrix, y: &DenseMatrix) -> DenseMatrix {
    if q.n_cols() == 0 {
        return y.clone();
    }
    let mut r = y.clone();
    for _ in 0..2 {
        let p = q.t_matmul(&r);
        r.axpy(-1.0, &q.matmul(&p));
    }
    r
}

fn max_col_norm(y: &DenseMatrix) -> f64 {
    (0..y.n_cols())
        .map(|j| y.col(j).iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}
