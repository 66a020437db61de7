//! Triangular solves and matrix multiply on [`DenseMatrix`].

use super::DenseMatrix;
use crate::error::{Error, Result};

/// Which side the triangular factor sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Solve `op(T) X = B`.
    Left,
    /// Solve `X op(T) = B`.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Triangle {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrsmFlags {
    pub side: Side,
    pub triangle: Triangle,
    pub transpose: bool,
    /// Treat the diagonal as all ones without reading it.
    pub unit_diag: bool,
}

impl TrsmFlags {
    pub const LOWER_UNIT: Self = Self {
        side: Side::Left,
        triangle: Triangle::Lower,
        transpose: false,
        unit_diag: true,
    };
    pub const LOWER: Self = Self {
        side: Side::Left,
        triangle: Triangle::Lower,
        transpose: false,
        unit_diag: false,
    };
    pub const UPPER: Self = Self {
        side: Side::Left,
        triangle: Triangle::Upper,
        transpose: false,
        unit_diag: false,
    };
    pub const RIGHT_UPPER: Self = Self {
        side: Side::Right,
        triangle: Triangle::Upper,
        transpose: false,
        unit_diag: false,
    };
}

/// Solves the triangular system described by `flags` and returns X.
pub fn trsm(t: &DenseMatrix, b: &DenseMatrix, flags: TrsmFlags) -> Result<DenseMatrix> {
    let mut x = b.clone();
    trsm_in_place(t, &mut x, flags)?;
    Ok(x)
}

/// In-place variant of [`trsm`]; `b` is overwritten with the solution.
pub fn trsm_in_place(t: &DenseMatrix, b: &mut DenseMatrix, flags: TrsmFlags) -> Result<()> {
    if !t.is_square() {
        return Err(Error::Dimension(format!(
            "triangular factor must be square, got {}x{}",
            t.n_rows(),
            t.n_cols()
        )));
    }
    let n = t.n_rows();
    let need = match flags.side {
        Side::Left => b.n_rows(),
        Side::Right => b.n_cols(),
    };
    if need != n {
        return Err(Error::Dimension(format!(
            "trsm: factor is {n}x{n} but right-hand side is {}x{}",
            b.n_rows(),
            b.n_cols()
        )));
    }
    if !flags.unit_diag {
        if let Some(k) = (0..n).find(|&k| t[(k, k)] == 0.0) {
            return Err(Error::SingularPivot { column: k });
        }
    }
    match flags.side {
        Side::Left => {
            // op(T) is lower when (lower, no-trans) or (upper, trans).
            let effective_lower = (flags.triangle == Triangle::Lower) != flags.transpose;
            for c in 0..b.n_cols() {
                let col = b.col_mut(c);
                if effective_lower {
                    forward_sub(t, col, flags.transpose, flags.unit_diag);
                } else {
                    backward_sub(t, col, flags.transpose, flags.unit_diag);
                }
            }
        }
        Side::Right => {
            // X op(T) = B  <=>  op(T)ᵀ Xᵀ = Bᵀ.
            let mut bt = b.transpose();
            let flipped = TrsmFlags {
                side: Side::Left,
                triangle: flags.triangle,
                transpose: !flags.transpose,
                unit_diag: flags.unit_diag,
            };
            trsm_in_place(t, &mut bt, flipped)?;
            *b = bt.transpose();
        }
    }
    Ok(())
}

// Solves op(T) x = rhs where op(T) is lower triangular.
fn forward_sub(t: &DenseMatrix, x: &mut [f64], transpose: bool, unit: bool) {
    let n = x.len();
    if transpose {
        // op(T) = Uᵀ, row i of Uᵀ is column i of U.
        for i in 0..n {
            let ucol = t.col(i);
            let s: f64 = (0..i).map(|k| ucol[k] * x[k]).sum();
            x[i] -= s;
            if !unit {
                x[i] /= ucol[i];
            }
        }
    } else {
        for j in 0..n {
            if !unit {
                x[j] /= t[(j, j)];
            }
            let xj = x[j];
            if xj != 0.0 {
                let lcol = t.col(j);
                for i in j + 1..n {
                    x[i] -= lcol[i] * xj;
                }
            }
        }
    }
}

// Solves op(T) x = rhs where op(T) is upper triangular.
fn backward_sub(t: &DenseMatrix, x: &mut [f64], transpose: bool, unit: bool) {
    let n = x.len();
    if transpose {
        // op(T) = Lᵀ, row i of Lᵀ is column i of L.
        for i in (0..n).rev() {
            let lcol = t.col(i);
            let s: f64 = (i + 1..n).map(|k| lcol[k] * x[k]).sum();
            x[i] -= s;
            if !unit {
                x[i] /= lcol[i];
            }
        }
    } else {
        for j in (0..n).rev() {
            if !unit {
                x[j] /= t[(j, j)];
            }
            let xj = x[j];
            if xj != 0.0 {
                let ucol = t.col(j);
                for i in 0..j {
                    x[i] -= ucol[i] * xj;
                }
            }
        }
    }
}

/// Returns `alpha * A * B + beta * C`.
pub fn gemm(
    alpha: f64,
    a: &DenseMatrix,
    b: &DenseMatrix,
    beta: f64,
    c: &DenseMatrix,
) -> Result<DenseMatrix> {
    if a.n_cols() != b.n_rows() || a.n_rows() != c.n_rows() || b.n_cols() != c.n_cols() {
        return Err(Error::Dimension(format!(
            "gemm: A {}x{}, B {}x{}, C {}x{}",
            a.n_rows(),
            a.n_cols(),
            b.n_rows(),
            b.n_cols(),
            c.n_rows(),
            c.n_cols()
        )));
    }
    let mut out = c.clone();
    gemm_acc(alpha, a, b, beta, &mut out);
    Ok(out)
}

/// `C <- alpha * A * B + beta * C`, dimensions assumed to conform.
pub(crate) fn gemm_acc(alpha: f64, a: &DenseMatrix, b: &DenseMatrix, beta: f64, c: &mut DenseMatrix) {
    debug_assert_eq!(a.n_cols(), b.n_rows());
    let m = a.n_rows();
    if beta != 1.0 {
        c.scale(beta);
    }
    if alpha == 0.0 {
        return;
    }
    for j in 0..b.n_cols() {
        for k in 0..a.n_cols() {
            let bkj = alpha * b[(k, j)];
            if bkj == 0.0 {
                continue;
            }
            let acol = a.col(k);
            let ccol = c.col_mut(j);
            for i in 0..m {
                ccol[i] += acol[i] * bkj;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn naive_gemm(alpha: f64, a: &DenseMatrix, b: &DenseMatrix, beta: f64, c: &DenseMatrix) -> DenseMatrix {
        DenseMatrix::from_fn(c.n_rows(), c.n_cols(), |i, j| {
            let mut s = 0.0;
            for k in 0..a.n_cols() {
                s += a[(i, k)] * b[(k, j)];
            }
            alpha * s + beta * c[(i, j)]
        })
    }

    #[test]
    fn gemm_identity_and_beta_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = DenseMatrix::random_uniform(3, 3, &mut rng);
        let c = DenseMatrix::random_uniform(3, 3, &mut rng);
        let i3 = DenseMatrix::identity(3);
        assert_eq!(gemm(1.0, &i3, &b, 0.0, &c).unwrap(), b);
        assert_eq!(gemm(0.0, &i3, &b, 1.0, &c).unwrap(), c);
    }

    #[test]
    fn gemm_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = DenseMatrix::random_uniform(3, 3, &mut rng);
        let b = DenseMatrix::random_uniform(3, 3, &mut rng);
        let c = DenseMatrix::random_uniform(3, 3, &mut rng);
        let got = gemm(0.7, &a, &b, -1.3, &c).unwrap();
        let want = naive_gemm(0.7, &a, &b, -1.3, &c);
        assert!(got.sub(&want).norm_max() <= 1e-14);
    }

    #[test]
    fn gemm_dimension_mismatch() {
        let a = DenseMatrix::zeros(2, 3);
        let b = DenseMatrix::zeros(2, 2);
        let c = DenseMatrix::zeros(2, 2);
        assert!(matches!(gemm(1.0, &a, &b, 0.0, &c), Err(Error::Dimension(_))));
    }

    #[test]
    fn trsm_trivial_cases() {
        let b = DenseMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(trsm(&DenseMatrix::identity(2), &b, TrsmFlags::LOWER).unwrap(), b);
        let x = trsm(&DenseMatrix::from_diag(&[2.0]), &DenseMatrix::from_rows(&[&[4.0]]), TrsmFlags::UPPER).unwrap();
        assert_eq!(x[(0, 0)], 2.0);
    }

    #[test]
    fn trsm_random_lower_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut t = DenseMatrix::random_uniform(6, 6, &mut rng);
        for j in 0..6 {
            for i in 0..j {
                t[(i, j)] = 0.0;
            }
            t[(j, j)] += 2.0_f64.copysign(t[(j, j)]);
        }
        let b = DenseMatrix::random_uniform(6, 2, &mut rng);
        let x = trsm(&t, &b, TrsmFlags::LOWER).unwrap();
        let r = t.matmul(&x).sub(&b);
        assert!(r.norm_fro() / b.norm_fro() <= 1e-12);
    }

    #[test]
    fn trsm_all_flag_combinations() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut full = DenseMatrix::random_uniform(5, 5, &mut rng);
        for k in 0..5 {
            full[(k, k)] = 3.0 + k as f64;
        }
        for &tri in &[Triangle::Lower, Triangle::Upper] {
            let t = DenseMatrix::from_fn(5, 5, |i, j| {
                let keep = match tri {
                    Triangle::Lower => i >= j,
                    Triangle::Upper => i <= j,
                };
                if keep { full[(i, j)] } else { 0.0 }
            });
            for &transpose in &[false, true] {
                for &unit in &[false, true] {
                    let mut tt = t.clone();
                    if unit {
                        for k in 0..5 {
                            tt[(k, k)] = 1.0;
                        }
                    }
                    let op = if transpose { tt.transpose() } else { tt.clone() };
                    let flags = TrsmFlags { side: Side::Left, triangle: tri, transpose, unit_diag: unit };
                    let b = DenseMatrix::random_uniform(5, 3, &mut rng);
                    let x = trsm(&t_with_unit(&t, unit), &b, flags).unwrap();
                    assert!(op.matmul(&x).sub(&b).norm_max() < 1e-12);
                    let br = DenseMatrix::random_uniform(3, 5, &mut rng);
                    let xr = trsm(&t_with_unit(&t, unit), &br, TrsmFlags { side: Side::Right, ..flags }).unwrap();
                    assert!(xr.matmul(&op).sub(&br).norm_max() < 1e-12);
                }
            }
        }
    }

    // With unit_diag the stored diagonal must be ignored, so poison it.
    fn t_with_unit(t: &DenseMatrix, unit: bool) -> DenseMatrix {
        let mut t = t.clone();
        if unit {
            for k in 0..t.n_rows() {
                t[(k, k)] = 1e300;
            }
        }
        t
    }

    #[test]
    fn trsm_zero_diagonal_is_singular() {
        let t = DenseMatrix::from_rows(&[&[1.0, 0.0], &[1.0, 0.0]]);
        let b = DenseMatrix::zeros(2, 1);
        assert_eq!(trsm(&t, &b, TrsmFlags::LOWER), Err(Error::SingularPivot { column: 1 }));
    }
}
