//! Dense LU with partial (row) pivoting.

use super::blas::{trsm_in_place, TrsmFlags};
use super::DenseMatrix;
use crate::error::{Error, Result};

/// `P·M = L·U` packed in one matrix: strictly lower part holds L (unit
/// diagonal implied), upper part holds U.
#[derive(Debug, Clone)]
pub struct LuFactors {
    packed: DenseMatrix,
    /// `perm[i]` is the original row that ended up in row `i`.
    perm: Vec<usize>,
}

/// Factors a square matrix. Fails on an exactly zero pivot column.
pub fn lu_partial_pivot(m: &DenseMatrix) -> Result<LuFactors> {
    LuFactors::factor(m.clone())
}

impl LuFactors {
    pub fn factor(mut a: DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!(
                "LU needs a square matrix, got {}x{}",
                a.n_rows(),
                a.n_cols()
            )));
        }
        let n = a.n_rows();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let col = a.col(k);
            let mut p = k;
            let mut best = col[k].abs();
            for (i, v) in col.iter().enumerate().skip(k + 1) {
                if v.abs() > best {
                    best = v.abs();
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::SingularPivot { column: k });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let c = a.col_mut(j);
                    c.swap(p, k);
                }
            }
            let pivot = a[(k, k)];
            {
                let c = a.col_mut(k);
                for v in &mut c[k + 1..] {
                    *v /= pivot;
                }
            }
            for j in k + 1..n {
                let (lk, cj) = a.two_cols_mut(k, j);
                let ukj = cj[k];
                if ukj == 0.0 {
                    continue;
                }
                for i in k + 1..n {
                    cj[i] -= lk[i] * ukj;
                }
            }
        }
        Ok(Self { packed: a, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn packed(&self) -> &DenseMatrix {
        &self.packed
    }

    pub fn l(&self) -> DenseMatrix {
        let n = self.dim();
        DenseMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.packed[(i, j)],
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Less => 0.0,
        })
    }

    pub fn u(&self) -> DenseMatrix {
        let n = self.dim();
        DenseMatrix::from_fn(n, n, |i, j| if i <= j { self.packed[(i, j)] } else { 0.0 })
    }

    /// Permutation matrix P with `P·M = L·U`.
    pub fn p_matrix(&self) -> DenseMatrix {
        let n = self.dim();
        DenseMatrix::from_fn(n, n, |i, j| if self.perm[i] == j { 1.0 } else { 0.0 })
    }

    /// Applies P to the rows of `b`.
    pub fn permute_rows(&self, b: &DenseMatrix) -> DenseMatrix {
        b.select_rows(&self.perm)
    }

    pub fn permute_vec(&self, b: &[f64]) -> Vec<f64> {
        self.perm.iter().map(|&p| b[p]).collect()
    }

    /// `L⁻¹ P b` in place.
    pub fn forward(&self, b: &mut DenseMatrix) {
        *b = self.permute_rows(b);
        trsm_in_place(&self.packed, b, TrsmFlags::LOWER_UNIT).expect("conforming lower solve");
    }

    /// `U⁻¹ b` in place.
    pub fn backward(&self, b: &mut DenseMatrix) {
        trsm_in_place(&self.packed, b, TrsmFlags::UPPER).expect("U has nonzero diagonal");
    }

    pub fn solve(&self, b: &DenseMatrix) -> DenseMatrix {
        let mut x = b.clone();
        self.forward(&mut x);
        self.backward(&mut x);
        x
    }

    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let mut x = self.permute_vec(b);
        self.forward_vec_permuted(&mut x);
        self.backward_vec(&mut x);
        x
    }

    /// Solves `Mᵀ x = b`: `Uᵀ Lᵀ P x = b`.
    pub fn solve_transpose(&self, b: &DenseMatrix) -> DenseMatrix {
        let mut y = b.clone();
        let ut = TrsmFlags {
            triangle: super::Triangle::Upper,
            transpose: true,
            ..TrsmFlags::LOWER
        };
        trsm_in_place(&self.packed, &mut y, ut).expect("U has nonzero diagonal");
        let lt = TrsmFlags {
            triangle: super::Triangle::Lower,
            transpose: true,
            unit_diag: true,
            ..TrsmFlags::LOWER
        };
        trsm_in_place(&self.packed, &mut y, lt).expect("conforming");
        // x = Pᵀ y
        let mut x = DenseMatrix::zeros(y.n_rows(), y.n_cols());
        for j in 0..y.n_cols() {
            for (i, &p) in self.perm.iter().enumerate() {
                x[(p, j)] = y[(i, j)];
            }
        }
        x
    }

    /// Unit-lower solve on an already row-permuted vector.
    pub fn forward_vec_permuted(&self, x: &mut [f64]) {
        let n = self.dim();
        for j in 0..n {
            let xj = x[j];
            if xj != 0.0 {
                let c = self.packed.col(j);
                for i in j + 1..n {
                    x[i] -= c[i] * xj;
                }
            }
        }
    }

    pub fn backward_vec(&self, x: &mut [f64]) {
        let n = self.dim();
        for j in (0..n).rev() {
            x[j] /= self.packed[(j, j)];
            let xj = x[j];
            if xj != 0.0 {
                let c = self.packed.col(j);
                for i in 0..j {
                    x[i] -= c[i] * xj;
                }
            }
        }
    }

    /// Largest |U| over largest |M| entry, a cheap growth indicator.
    pub fn growth(&self, original_max: f64) -> f64 {
        if original_max == 0.0 {
            return 1.0;
        }
        self.u().norm_max() / original_max
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_factors_trivially() {
        let f = lu_partial_pivot(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(f.perm(), &[0, 1, 2]);
        assert_eq!(f.l(), DenseMatrix::identity(3));
        assert_eq!(f.u(), DenseMatrix::identity(3));
    }

    #[test]
    fn forced_pivot_swaps_rows() {
        let m = DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let f = lu_partial_pivot(&m).unwrap();
        assert_eq!(f.perm(), &[1, 0]);
        assert_eq!(f.l(), DenseMatrix::identity(2));
        assert_eq!(f.u(), DenseMatrix::identity(2));
    }

    #[test]
    fn random_8x8_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = DenseMatrix::random_uniform(8, 8, &mut rng);
        let f = lu_partial_pivot(&m).unwrap();
        let pm = f.p_matrix().matmul(&m);
        let lu = f.l().matmul(&f.u());
        assert!(pm.sub(&lu).norm_max() <= 1e-13);
        assert!(f.l().norm_max() <= 1.0);
    }

    #[test]
    fn zero_column_reports_index() {
        let m = DenseMatrix::from_rows(&[&[1.0, 0.0, 2.0], &[2.0, 0.0, 1.0], &[3.0, 0.0, 0.0]]);
        assert_eq!(lu_partial_pivot(&m).unwrap_err(), Error::SingularPivot { column: 1 });
    }

    #[test]
    fn solves_and_transposed_solves() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = DenseMatrix::random_uniform(7, 7, &mut rng);
        let f = lu_partial_pivot(&m).unwrap();
        let b = DenseMatrix::random_uniform(7, 2, &mut rng);
        let x = f.solve(&b);
        assert!(m.matmul(&x).sub(&b).norm_max() < 1e-10);
        let xt = f.solve_transpose(&b);
        assert!(m.transpose().matmul(&xt).sub(&b).norm_max() < 1e-10);
        let xv = f.solve_vec(b.col(0));
        for (a, c) in xv.iter().zip(x.col(0)) {
            assert!((a - c).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn plu_reconstruction_bound(n in 1usize..=64, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = DenseMatrix::random_uniform(n, n, &mut rng);
            let f = lu_partial_pivot(&m).unwrap();
            let err = f.p_matrix().matmul(&m).sub(&f.l().matmul(&f.u())).norm_max();
            prop_assert!(err <= (n * n) as f64 * 1e-14 * m.norm_max());
        }
    }
}
