//! Adaptive cross approximation with partial pivoting.

use super::matrix::dot;
use super::{DenseMatrix, LowRankFactor};

#[derive(Debug, Clone, Copy)]
pub struct AcaOptions {
    pub tol: f64,
    /// Hard cap on the number of crosses; reaching it before the stopping
    /// test passes marks the factor unconverged.
    pub max_rank: Option<usize>,
    /// How many consecutive all-zero residual rows to skip before giving
    /// up. `None` scans every remaining row, which proves a zero residual.
    pub max_zero_rows: Option<usize>,
}

impl AcaOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            max_rank: None,
            max_zero_rows: None,
        }
    }
}

/// ACA of the m×n block whose entries are produced by `entry`.
pub fn aca(entry: impl Fn(usize, usize) -> f64, m: usize, n: usize, tol: f64) -> LowRankFactor {
    aca_with(entry, m, n, &AcaOptions::new(tol))
}

pub fn aca_with(entry: impl Fn(usize, usize) -> f64, m: usize, n: usize, opts: &AcaOptions) -> LowRankFactor {
    let max_rank = opts.max_rank.unwrap_or(usize::MAX).min(m.min(n));
    let mut us: Vec<Vec<f64>> = Vec::new();
    let mut vs: Vec<Vec<f64>> = Vec::new();
    let mut row_used = vec![false; m];
    let mut norm2_est = 0.0_f64;
    let mut converged = false;
    let mut zero_rows = 0usize;
    let mut next_row = if m > 0 { Some(0) } else { None };

    while let Some(i) = next_row {
        if us.len() >= max_rank {
            // Full rank reached: the residual is exactly zero.
            converged = us.len() == m.min(n);
            break;
        }
        row_used[i] = true;
        let mut row: Vec<f64> = (0..n).map(|j| entry(i, j)).collect();
        for (u, v) in us.iter().zip(&vs) {
            let ui = u[i];
            if ui != 0.0 {
                for (r, vj) in row.iter_mut().zip(v) {
                    *r -= ui * vj;
                }
            }
        }
        let (jmax, pivot) = argmax_abs(&row);
        if pivot == 0.0 {
            zero_rows += 1;
            if opts.max_zero_rows.is_some_and(|limit| zero_rows > limit) {
                break;
            }
            next_row = (0..m).find(|&r| !row_used[r]);
            if next_row.is_none() {
                converged = true;
            }
            continue;
        }
        zero_rows = 0;
        let pv = row[jmax];
        let v: Vec<f64> = row.iter().map(|x| x / pv).collect();
        let mut u: Vec<f64> = (0..m).map(|r| entry(r, jmax)).collect();
        for (uk, vk) in us.iter().zip(&vs) {
            let s = vk[jmax];
            if s != 0.0 {
                for (a, b) in u.iter_mut().zip(uk) {
                    *a -= s * b;
                }
            }
        }
        let nu2 = dot(&u, &u);
        let nv2 = dot(&v, &v);
        let mut cross = 0.0;
        for (uk, vk) in us.iter().zip(&vs) {
            cross += dot(&u, uk) * dot(&v, vk);
        }
        norm2_est = (norm2_est + 2.0 * cross + nu2 * nv2).max(0.0);
        let step = (nu2 * nv2).sqrt();
        us.push(u);
        vs.push(v);
        if step <= opts.tol * norm2_est.sqrt() {
            converged = true;
            break;
        }
        let last = us.last().expect("just pushed");
        next_row = (0..m)
            .filter(|&r| !row_used[r])
            .max_by(|&a, &b| {
                last[a]
                    .abs()
                    .partial_cmp(&last[b].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
                    // Prefer the lower index on ties.
                    .then(b.cmp(&a))
            });
        if next_row.is_none() {
            converged = true;
        }
    }
    if m == 0 || n == 0 {
        converged = true;
    }
    let r = us.len();
    let u = DenseMatrix::from_col_major(m, r, us.into_iter().flatten().collect());
    let v = DenseMatrix::from_col_major(n, r, vs.into_iter().flatten().collect());
    let mut f = LowRankFactor::new(u, v, opts.tol);
    f.converged = converged;
    f
}

fn argmax_abs(x: &[f64]) -> (usize, f64) {
    let mut best = (0, 0.0);
    for (j, v) in x.iter().enumerate() {
        if v.abs() > best.1 {
            best = (j, v.abs());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_block_needs_one_cross() {
        let a: Vec<f64> = (0..10).map(|i| 1.0 + i as f64).collect();
        let b: Vec<f64> = (0..8).map(|j| 2.0 - 0.3 * j as f64).collect();
        let f = aca(|i, j| a[i] * b[j], 10, 8, 1e-10);
        assert_eq!(f.rank(), 1);
        assert!(f.converged);
    }

    #[test]
    fn zero_block_is_rank_zero_and_converged() {
        let f = aca(|_, _| 0.0, 6, 9, 1e-8);
        assert_eq!(f.rank(), 0);
        assert!(f.converged);
    }

    #[test]
    fn limited_zero_row_scan_flags_unconverged() {
        // Only the last row is nonzero; a short scan gives up early.
        let f = aca_with(
            |i, j| if i == 7 { 1.0 + j as f64 } else { 0.0 },
            8,
            4,
            &AcaOptions { tol: 1e-8, max_rank: None, max_zero_rows: Some(2) },
        );
        assert!(!f.converged);
        let full = aca(|i, j| if i == 7 { 1.0 + j as f64 } else { 0.0 }, 8, 4, 1e-8);
        assert_eq!(full.rank(), 1);
        assert!(full.converged);
    }

    #[test]
    fn rank_cap_flags_unconverged() {
        let f = aca_with(
            |i, j| if i == j { 1.0 } else { 0.0 },
            5,
            5,
            &AcaOptions { tol: 1e-12, max_rank: Some(2), max_zero_rows: None },
        );
        assert_eq!(f.rank(), 2);
        assert!(!f.converged);
    }
}
