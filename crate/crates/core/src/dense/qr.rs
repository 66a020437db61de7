//! Householder QR, optionally with column pivoting.

use super::matrix::{dot, norm2};
use super::DenseMatrix;

/// Thin QR: `A = Q R` with `Q` m×k orthonormal, `R` k×n, k = min(m, n).
pub struct Qr {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
}

/// Column-pivoted QR: `A[:, perm] = Q R`, with |R_kk| non-increasing.
pub struct PivotedQr {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
    pub perm: Vec<usize>,
}

struct Reflectors {
    /// Householder vectors stored below the diagonal (v_k[k] = 1 implicit).
    packed: DenseMatrix,
    tau: Vec<f64>,
    perm: Vec<usize>,
}

fn householder(a: DenseMatrix, pivot: bool) -> Reflectors {
    let mut a = a;
    let (m, n) = a.shape();
    let k = m.min(n);
    let mut tau = vec![0.0; k];
    let mut perm: Vec<usize> = (0..n).collect();
    let mut col_norms: Vec<f64> = (0..n).map(|j| norm2(a.col(j))).collect();

    for step in 0..k {
        if pivot {
            let mut p = step;
            for j in step + 1..n {
                if col_norms[j] > col_norms[p] {
                    p = j;
                }
            }
            if p != step {
                let (x, y) = a.two_cols_mut(step, p);
                x.swap_with_slice(y);
                col_norms.swap(step, p);
                perm.swap(step, p);
            }
        }
        let col = a.col_mut(step);
        let alpha = col[step];
        let sigma: f64 = col[step + 1..].iter().map(|x| x * x).sum();
        if sigma == 0.0 {
            tau[step] = 0.0;
        } else {
            let norm = (alpha * alpha + sigma).sqrt();
            let beta = if alpha <= 0.0 { norm } else { -norm };
            let v0 = alpha - beta;
            for x in &mut col[step + 1..] {
                *x /= v0;
            }
            tau[step] = (beta - alpha) / beta;
            col[step] = beta;
        }
        if tau[step] != 0.0 {
            for j in step + 1..n {
                let (v, c) = a.two_cols_mut(step, j);
                let mut s = c[step];
                for i in step + 1..m {
                    s += v[i] * c[i];
                }
                s *= tau[step];
                c[step] -= s;
                for i in step + 1..m {
                    c[i] -= s * v[i];
                }
            }
        }
        if pivot {
            // Exact recomputation; norm downdating is not worth the fuss here.
            for j in step + 1..n {
                col_norms[j] = norm2(&a.col(j)[step + 1..]);
            }
        }
    }
    Reflectors {
        packed: a,
        tau,
        perm,
    }
}

impl Reflectors {
    fn r(&self) -> DenseMatrix {
        let (m, n) = self.packed.shape();
        let k = m.min(n);
        DenseMatrix::from_fn(k, n, |i, j| if i <= j { self.packed[(i, j)] } else { 0.0 })
    }

    fn thin_q(&self) -> DenseMatrix {
        let (m, n) = self.packed.shape();
        let k = m.min(n);
        let mut q = DenseMatrix::zeros(m, k);
        for i in 0..k {
            q[(i, i)] = 1.0;
        }
        for step in (0..k).rev() {
            let t = self.tau[step];
            if t == 0.0 {
                continue;
            }
            let v = self.packed.col(step);
            for j in 0..k {
                let c = q.col_mut(j);
                let mut s = c[step];
                for i in step + 1..m {
                    s += v[i] * c[i];
                }
                s *= t;
                c[step] -= s;
                for i in step + 1..m {
                    c[i] -= s * v[i];
                }
            }
        }
        q
    }
}

pub fn qr(a: &DenseMatrix) -> Qr {
    let h = householder(a.clone(), false);
    Qr {
        q: h.thin_q(),
        r: h.r(),
    }
}

pub fn pivoted_qr(a: &DenseMatrix) -> PivotedQr {
    let h = householder(a.clone(), true);
    PivotedQr {
        q: h.thin_q(),
        r: h.r(),
        perm: h.perm,
    }
}

/// Orthonormalizes the columns of `y` against `q` (twice) and returns
/// the orthonormal basis of what remains, dropping columns whose
/// residual norm is below `drop_tol`.
pub(crate) fn orthonormal_complement(q: &DenseMatrix, y: &DenseMatrix, drop_tol: f64) -> DenseMatrix {
    let mut y = y.clone();
    for _ in 0..2 {
        if q.n_cols() == 0 {
            break;
        }
        let proj = q.t_matmul(&y);
        y.axpy(-1.0, &q.matmul(&proj));
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for j in 0..y.n_cols() {
        let mut v = y.col(j).to_vec();
        for _ in 0..2 {
            for b in &basis {
                let s = dot(b, &v);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= s * bi;
                }
            }
            if q.n_cols() > 0 {
                let s = q.matvec_t(&v);
                let qs = q.matvec(&s);
                for (vi, qi) in v.iter_mut().zip(&qs) {
                    *vi -= qi;
                }
            }
        }
        let nv = norm2(&v);
        if nv > drop_tol {
            v.iter_mut().for_each(|x| *x /= nv);
            basis.push(v);
        }
    }
    let m = y.n_rows();
    let cols = basis.len();
    DenseMatrix::from_col_major(m, cols, basis.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn qr_reconstructs_tall_and_wide() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(m, n) in &[(9, 4), (4, 9), (6, 6), (1, 3)] {
            let a = DenseMatrix::random_uniform(m, n, &mut rng);
            let Qr { q, r } = qr(&a);
            assert!(q.matmul(&r).sub(&a).norm_max() < 1e-13);
            let qtq = q.t_matmul(&q);
            assert!(qtq.sub(&DenseMatrix::identity(q.n_cols())).norm_max() < 1e-13);
        }
    }

    #[test]
    fn pivoted_qr_orders_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = DenseMatrix::random_uniform(8, 6, &mut rng);
        let p = pivoted_qr(&a);
        let ap = a.select_cols(&p.perm);
        assert!(p.q.matmul(&p.r).sub(&ap).norm_max() < 1e-13);
        for k in 1..6 {
            assert!(p.r[(k, k)].abs() <= p.r[(k - 1, k - 1)].abs() + 1e-12);
        }
    }
}
