use super::qr::qr;
use super::svd::{svd, truncation_rank};
use super::DenseMatrix;

/// A block approximated as `U·Vᵀ` with `U` m×r and `V` n×r.
#[derive(Debug, Clone)]
pub struct LowRankFactor {
    pub u: DenseMatrix,
    pub v: DenseMatrix,
    /// Requested relative tolerance the factor was built with.
    pub tol: f64,
    /// False when a construction routine stopped before meeting `tol`.
    pub converged: bool,
}

impl LowRankFactor {
    pub fn new(u: DenseMatrix, v: DenseMatrix, tol: f64) -> Self {
        assert_eq!(u.n_cols(), v.n_cols(), "U and V must share the rank");
        Self {
            u,
            v,
            tol,
            converged: true,
        }
    }

    pub fn zero(m: usize, n: usize) -> Self {
        Self::new(DenseMatrix::zeros(m, 0), DenseMatrix::zeros(n, 0), 0.0)
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.u.n_cols()
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.u.n_rows()
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.v.n_rows()
    }

    /// Stored scalars, `r·(m+n)`.
    pub fn storage(&self) -> usize {
        self.rank() * (self.n_rows() + self.n_cols())
    }

    pub fn to_dense(&self) -> DenseMatrix {
        if self.rank() == 0 {
            return DenseMatrix::zeros(self.n_rows(), self.n_cols());
        }
        self.u.matmul_t(&self.v)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        if self.rank() == 0 {
            return vec![0.0; self.n_rows()];
        }
        self.u.matvec(&self.v.matvec_t(x))
    }

    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        if self.rank() == 0 {
            return vec![0.0; self.n_cols()];
        }
        self.v.matvec(&self.u.matvec_t(x))
    }

    /// `(U Vᵀ) X` as a dense matrix.
    pub fn matmul(&self, x: &DenseMatrix) -> DenseMatrix {
        if self.rank() == 0 {
            return DenseMatrix::zeros(self.n_rows(), x.n_cols());
        }
        self.u.matmul(&self.v.t_matmul(x))
    }

    /// `(U Vᵀ)ᵀ X`.
    pub fn t_matmul(&self, x: &DenseMatrix) -> DenseMatrix {
        if self.rank() == 0 {
            return DenseMatrix::zeros(self.n_cols(), x.n_cols());
        }
        self.v.matmul(&self.u.t_matmul(x))
    }

    pub fn transpose(&self) -> Self {
        Self {
            u: self.v.clone(),
            v: self.u.clone(),
            tol: self.tol,
            converged: self.converged,
        }
    }

    /// Rows `rows` and columns `cols` of the represented block.
    pub fn restrict(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let r = self.rank();
        Self {
            u: self.u.submatrix(rows, 0..r),
            v: self.v.submatrix(cols, 0..r),
            tol: self.tol,
            converged: self.converged,
        }
    }

    /// Exact sum `self + alpha·other` by concatenating factors (rank adds).
    pub fn concat(&self, alpha: f64, other: &LowRankFactor) -> Self {
        assert_eq!(
            (self.n_rows(), self.n_cols()),
            (other.n_rows(), other.n_cols()),
            "low-rank sum shape mismatch"
        );
        Self {
            u: self.u.hcat(&other.u.clone().scaled(alpha)),
            v: self.v.hcat(&other.v),
            tol: self.tol.max(other.tol),
            converged: self.converged && other.converged,
        }
    }

    /// Truncates to the smallest rank whose spectral error is at most
    /// `tol·σ₁` via QR of both factors and an SVD of the small core.
    pub fn recompress(&self, tol: f64) -> Self {
        let r = self.rank();
        if r == 0 {
            return self.clone();
        }
        let qu = qr(&self.u);
        let qv = qr(&self.v);
        let core = qu.r.matmul_t(&qv.r);
        let d = svd(&core);
        let k = truncation_rank(&d.s, tol);
        let w = DenseMatrix::from_fn(d.u.n_rows(), k, |i, j| d.u[(i, j)] * d.s[j]);
        let z = DenseMatrix::from_fn(d.v.n_rows(), k, |i, j| d.v[(i, j)]);
        Self {
            u: qu.q.matmul(&w),
            v: qv.q.matmul(&z),
            tol: tol.max(self.tol),
            converged: self.converged,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn concat_then_recompress_keeps_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a = LowRankFactor::new(
            DenseMatrix::random_uniform(20, 2, &mut rng),
            DenseMatrix::random_uniform(15, 2, &mut rng),
            1e-12,
        );
        let b = LowRankFactor::new(a.u.clone(), DenseMatrix::random_uniform(15, 2, &mut rng), 1e-12);
        let sum = a.concat(-1.0, &b);
        assert_eq!(sum.rank(), 4);
        let c = sum.recompress(1e-12);
        // Shared column space: rank collapses to 2.
        assert_eq!(c.rank(), 2);
        let want = a.to_dense().sub(&b.to_dense());
        assert!(c.to_dense().sub(&want).norm_max() < 1e-12);
    }

    #[test]
    fn matvec_agrees_with_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let f = LowRankFactor::new(
            DenseMatrix::random_uniform(7, 3, &mut rng),
            DenseMatrix::random_uniform(5, 3, &mut rng),
            0.0,
        );
        let x: Vec<f64> = (0..5).map(|i| i as f64 - 2.0).collect();
        let y = f.matvec(&x);
        let yd = f.to_dense().matvec(&x);
        assert!(y.iter().zip(&yd).all(|(a, b)| (a - b).abs() < 1e-13));
        let z: Vec<f64> = (0..7).map(|i| 0.5 * i as f64).collect();
        let yt = f.matvec_t(&z);
        let ytd = f.to_dense().matvec_t(&z);
        assert!(yt.iter().zip(&ytd).all(|(a, b)| (a - b).abs() < 1e-13));
    }
}
