//! Iterative row/column max-norm equilibration.

use super::SparseMatrix;
use crate::error::{Error, Result};

/// Entry-magnitude window: after scaling every row and column max lies
/// in `[1/RHO, 1]`.
pub const RHO: f64 = 10.0;
const DRIFT_TOL: f64 = 1e-2;
const MAX_SWEEPS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibration {
    pub d_row: Vec<f64>,
    pub d_col: Vec<f64>,
    pub scaled: SparseMatrix,
    pub sweeps: usize,
}

fn row_col_max(a: &SparseMatrix) -> (Vec<f64>, Vec<f64>) {
    let mut rmax = vec![0.0f64; a.n_rows()];
    let mut cmax = vec![0.0f64; a.n_cols()];
    for (i, j, v) in a.triplets() {
        let v = v.abs();
        rmax[i] = rmax[i].max(v);
        cmax[j] = cmax[j].max(v);
    }
    (rmax, cmax)
}

fn drift(rmax: &[f64], cmax: &[f64]) -> f64 {
    rmax.iter().chain(cmax).map(|m| (1.0 - m).abs()).fold(0.0, f64::max)
}

/// Scales `A` by alternating square-root row/column max normalization
/// until every max is within 1e-2 of one (at most ten sweeps), then
/// normalizes rows exactly so no entry exceeds one.
pub fn equilibrate(a: &SparseMatrix) -> Result<Equilibration> {
    let (rmax, cmax) = row_col_max(a);
    if let Some(i) = rmax.iter().position(|&m| m == 0.0) {
        return Err(Error::StructurallySingular(format!("row {i} is empty")));
    }
    if let Some(j) = cmax.iter().position(|&m| m == 0.0) {
        return Err(Error::StructurallySingular(format!("column {j} is empty")));
    }
    let mut d_row = vec![1.0; a.n_rows()];
    let mut d_col = vec![1.0; a.n_cols()];
    let mut scaled = a.clone();
    let mut sweeps = 0;
    let (mut rmax, mut cmax) = (rmax, cmax);
    while sweeps < MAX_SWEEPS && drift(&rmax, &cmax) >= DRIFT_TOL {
        let r: Vec<f64> = rmax.iter().map(|m| 1.0 / m.sqrt()).collect();
        let c: Vec<f64> = cmax.iter().map(|m| 1.0 / m.sqrt()).collect();
        d_row.iter_mut().zip(&r).for_each(|(d, s)| *d *= s);
        d_col.iter_mut().zip(&c).for_each(|(d, s)| *d *= s);
        scaled = a.scale(&d_row, &d_col);
        (rmax, cmax) = row_col_max(&scaled);
        sweeps += 1;
    }
    if rmax.iter().any(|&m| m != 1.0) {
        d_row.iter_mut().zip(&rmax).for_each(|(d, m)| *d /= m);
        scaled.update_values(|i, _, v| v / rmax[i]);
    }
    if d_row.iter().chain(&d_col).any(|d| !d.is_finite() || *d <= 0.0) {
        return Err(Error::SizeOverflow("scaling factors left the floating-point range".into()));
    }
    Ok(Equilibration {
        d_row,
        d_col,
        scaled,
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn maxes(a: &SparseMatrix) -> (Vec<f64>, Vec<f64>) {
        row_col_max(a)
    }

    #[test]
    fn identity_is_untouched() {
        let e = equilibrate(&SparseMatrix::identity(4)).unwrap();
        assert_eq!(e.d_row, vec![1.0; 4]);
        assert_eq!(e.d_col, vec![1.0; 4]);
        assert_eq!(e.sweeps, 0);
    }

    #[test]
    fn diagonal_four_one() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 4.0), (1, 1, 1.0)]).unwrap();
        let e = equilibrate(&a).unwrap();
        assert_eq!(e.d_row, vec![0.5, 1.0]);
        assert_eq!(e.d_col, vec![0.5, 1.0]);
        assert_eq!(e.scaled.get(0, 0), Some(1.0));
    }

    #[test]
    fn badly_scaled_two_by_two() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1e6), (1, 0, 1e-6), (1, 1, 1.0)]).unwrap();
        let e = equilibrate(&a).unwrap();
        let (r, c) = maxes(&e.scaled);
        for m in r {
            assert_eq!(m, 1.0);
        }
        for m in c {
            assert!(m <= 1.0 && (1.0 - m) < 2e-2, "column max {m}");
        }
    }

    #[test]
    fn zero_row_is_structural() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
        assert!(matches!(equilibrate(&a), Err(Error::StructurallySingular(_))));
    }

    #[test]
    fn idempotent_and_in_window() {
        let mut t = Vec::new();
        for i in 0..30usize {
            t.push((i, i, 1.0 + (i * i) as f64));
            t.push(((i * 7 + 3) % 30, i, 1e-3 * (i + 1) as f64));
            t.push((i, (i * 11 + 5) % 30, 1e4 / (i + 1) as f64));
        }
        let a = SparseMatrix::from_triplets(30, 30, &t).unwrap();
        let e = equilibrate(&a).unwrap();
        let (r, c) = maxes(&e.scaled);
        for m in r.iter().chain(&c) {
            assert!((1.0 / RHO..=1.0).contains(m), "max {m} outside window");
        }
        let again = equilibrate(&e.scaled).unwrap();
        for d in again.d_row.iter().chain(&again.d_col) {
            assert!((d - 1.0).abs() <= 1e-14);
        }
    }
}
