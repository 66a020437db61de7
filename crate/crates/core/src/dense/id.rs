//! Row interpolative decomposition via column-pivoted QR.

use super::blas::{trsm_in_place, TrsmFlags};
use super::qr::pivoted_qr;
use super::DenseMatrix;

/// `M ≈ interp · M[skeleton_indices, :]`.
#[derive(Debug, Clone)]
pub struct Skeleton {
    pub skeleton_indices: Vec<usize>,
    /// m×k, identity on the skeleton rows.
    pub interp: DenseMatrix,
}

impl Skeleton {
    pub fn rank(&self) -> usize {
        self.skeleton_indices.len()
    }

    pub fn reconstruct(&self, m: &DenseMatrix) -> DenseMatrix {
        self.interp.matmul(&m.select_rows(&self.skeleton_indices))
    }
}

/// Selects skeleton rows of `m`. Rank is the number of pivoted-QR
/// diagonal entries of `Mᵀ` above `tol · |R₀₀|`.
pub fn interpolative_decomposition(m: &DenseMatrix, tol: f64) -> Skeleton {
    let n_rows = m.n_rows();
    if n_rows == 0 || m.n_cols() == 0 {
        return Skeleton {
            skeleton_indices: Vec::new(),
            interp: DenseMatrix::zeros(n_rows, 0),
        };
    }
    let f = pivoted_qr(&m.transpose());
    let diag_len = f.r.n_rows();
    let r00 = f.r[(0, 0)].abs();
    let k = if r00 == 0.0 {
        0
    } else {
        (0..diag_len).take_while(|&i| f.r[(i, i)].abs() > tol * r00).count()
    };
    let skel: Vec<usize> = f.perm[..k].to_vec();
    let mut interp = DenseMatrix::zeros(n_rows, k);
    for (a, &row) in skel.iter().enumerate() {
        interp[(row, a)] = 1.0;
    }
    if k > 0 && k < n_rows {
        let r11 = f.r.submatrix(0..k, 0..k);
        let mut t = f.r.submatrix(0..k, k..n_rows);
        trsm_in_place(&r11, &mut t, TrsmFlags::UPPER).expect("R11 diagonal is above tolerance");
        for (b, &row) in f.perm[k..].iter().enumerate() {
            for a in 0..k {
                interp[(row, a)] = t[(a, b)];
            }
        }
    }
    Skeleton {
        skeleton_indices: skel,
        interp,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::truncated_svd;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn duplicate_rows_yield_one_skeleton() {
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], &[0.0, 1.0, 0.0]]);
        let s = interpolative_decomposition(&m, 1e-12);
        let dup = s.skeleton_indices.iter().filter(|&&i| i < 2).count();
        assert!(dup <= 1);
        assert!(s.reconstruct(&m).sub(&m).norm_max() < 1e-12);
    }

    #[test]
    fn identity_keeps_every_row() {
        let s = interpolative_decomposition(&DenseMatrix::identity(4), 1e-12);
        let mut idx = s.skeleton_indices.clone();
        idx.sort_unstable();
        assert_eq!(idx, vec![0, 1, 2, 3]);
    }

    #[test]
    fn rank_three_with_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let a = DenseMatrix::random_uniform(16, 3, &mut rng);
        let b = DenseMatrix::random_uniform(3, 16, &mut rng);
        let mut m = a.matmul(&b);
        let noise = DenseMatrix::random_uniform(16, 16, &mut rng).scaled(1e-12);
        m.axpy(1.0, &noise);
        assert_eq!(truncated_svd(&m, 1e-8).rank(), 3);
        let s = interpolative_decomposition(&m, 1e-8);
        assert_eq!(s.rank(), 3);
        for (a, &row) in s.skeleton_indices.iter().enumerate() {
            for c in 0..3 {
                assert_eq!(s.interp[(row, c)], if a == c { 1.0 } else { 0.0 });
            }
        }
        assert!(s.reconstruct(&m).sub(&m).norm_fro() / m.norm_fro() < 1e-7);
    }
}
