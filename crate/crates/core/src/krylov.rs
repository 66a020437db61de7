//! Restarted GMRES with right preconditioning.
//!
//! Solves `A M y = b` and returns `x = M y`, so the residuals recorded in
//! the trace are residuals of the original system.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

const HAPPY_BREAKDOWN: f64 = 1e-14;
const ORTHOGONALITY_LOSS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    /// Relative residual target `‖b − A x‖ / ‖b‖`.
    pub tol: f64,
    pub restart: usize,
    /// Total Arnoldi steps over all cycles.
    pub max_iters: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            restart: 50,
            max_iters: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    /// Relative residual before the first step and after each step.
    /// Within a cycle these are the Arnoldi estimates; the entry closing
    /// a cycle is the recomputed true residual.
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub restarts: usize,
    /// The Krylov space became invariant before reaching `tol`.
    pub breakdown: bool,
}

impl IterationTrace {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().expect("history holds the initial residual")
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,relative_residual\n");
        for (k, r) in self.residual_history.iter().enumerate() {
            let _ = writeln!(s, "{k},{r:e}");
        }
        s
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn check_len(v: Vec<f64>, n: usize, what: &str) -> Result<Vec<f64>> {
    if v.len() == n {
        Ok(v)
    } else {
        Err(Error::Dimension(format!("{what} returned length {} for a system of size {n}", v.len())))
    }
}

/// Starts from `x = 0`. `apply_a` must be linear; `precond` approximates
/// `A⁻¹`.
pub fn gmres<A, M>(mut apply_a: A, mut precond: M, b: &[f64], opts: &GmresOptions) -> Result<(Vec<f64>, IterationTrace)>
where
    A: FnMut(&[f64]) -> Vec<f64>,
    M: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if !(opts.tol > 0.0 && opts.tol < 1.0) {
        return Err(Error::Config(format!("GMRES tolerance {} is outside (0, 1)", opts.tol)));
    }
    if opts.restart == 0 {
        return Err(Error::Config("GMRES restart length must be at least 1".into()));
    }
    let n = b.len();
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    let mut trace = IterationTrace {
        residual_history: vec![if b_norm == 0.0 { 0.0 } else { 1.0 }],
        iterations: 0,
        converged: b_norm == 0.0,
        restarts: 0,
        breakdown: false,
    };
    if trace.converged {
        return Ok((x, trace));
    }
    let mut r = b.to_vec();
    let m = opts.restart;

    loop {
        let beta = norm(&r);
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|ri| ri / beta).collect());
        // Column j of the Hessenberg matrix, already rotated.
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<f64> = Vec::with_capacity(m);
        let mut g = vec![beta];
        let mut hit_breakdown = false;

        while h.len() < m && trace.iterations < opts.max_iters {
            let j = h.len();
            let z = check_len(precond(&v[j])?, n, "preconditioner")?;
            let mut w = check_len(apply_a(&z), n, "operator")?;
            let mut col = vec![0.0; j + 2];
            for (i, vi) in v.iter().enumerate() {
                col[i] = dot(&w, vi);
                axpy(&mut w, -col[i], vi);
            }
            let mut w_norm = norm(&w);
            if w_norm > 0.0 {
                let loss = v.iter().map(|vi| dot(&w, vi).abs()).fold(0.0, f64::max) / w_norm;
                if loss > ORTHOGONALITY_LOSS {
                    for (i, vi) in v.iter().enumerate() {
                        let c = dot(&w, vi);
                        col[i] += c;
                        axpy(&mut w, -c, vi);
                    }
                    w_norm = norm(&w);
                }
            }
            col[j + 1] = w_norm;

            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let d = col[j].hypot(col[j + 1]);
            let (c, s) = if d == 0.0 { (1.0, 0.0) } else { (col[j] / d, col[j + 1] / d) };
            col[j] = d;
            col.truncate(j + 1);
            cs.push(c);
            sn.push(s);
            g.push(-s * g[j]);
            g[j] *= c;
            h.push(col);
            trace.iterations += 1;
            trace.residual_history.push(g[j + 1].abs() / b_norm);

            if g[j + 1].abs() <= opts.tol * b_norm {
                break;
            }
            if w_norm <= HAPPY_BREAKDOWN * beta {
                hit_breakdown = true;
                break;
            }
            v.push(w.iter().map(|wi| wi / w_norm).collect());
        }

        let k = h.len();
        let mut y = g[..k].to_vec();
        for i in (0..k).rev() {
            for l in i + 1..k {
                y[i] -= h[l][i] * y[l];
            }
            if h[i][i] == 0.0 {
                return Err(Error::SingularPivot { column: i });
            }
            y[i] /= h[i][i];
        }
        let mut u = vec![0.0; n];
        for (vi, yi) in v.iter().zip(&y) {
            axpy(&mut u, *yi, vi);
        }
        let dx = check_len(precond(&u)?, n, "preconditioner")?;
        axpy(&mut x, 1.0, &dx);
        let ax = check_len(apply_a(&x), n, "operator")?;
        r = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let rel = norm(&r) / b_norm;
        *trace.residual_history.last_mut().expect("nonempty") = rel;

        if rel <= opts.tol {
            trace.converged = true;
            break;
        }
        if hit_breakdown {
            trace.breakdown = true;
            break;
        }
        if trace.iterations >= opts.max_iters || !rel.is_finite() {
            break;
        }
        trace.restarts += 1;
    }
    Ok((x, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{lu_partial_pivot, DenseMatrix};
    use crate::multifrontal::{multifrontal_factorize, Compression, Policy};
    use crate::sparse::{model_problem, ModelKind, SparseMatrix};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn identity(x: &[f64]) -> Result<Vec<f64>> {
        Ok(x.to_vec())
    }

    fn true_residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> f64 {
        let ax = a.matvec(x);
        norm(&b.iter().zip(&ax).map(|(p, q)| p - q).collect::<Vec<_>>()) / norm(b)
    }

    #[test]
    fn identity_converges_in_one_step() {
        let b = vec![1.0, -2.0, 0.5];
        let (x, t) = gmres(|v: &[f64]| v.to_vec(), identity, &b, &GmresOptions::default()).unwrap();
        assert_eq!(t.iterations, 1);
        assert!(t.converged);
        assert_eq!(t.residual_history.len(), 2);
        assert_eq!(x, b);
    }

    #[test]
    fn exact_dense_preconditioner() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut a = DenseMatrix::random_normal(12, 12, &mut rng);
        for i in 0..12 {
            a[(i, i)] += 6.0;
        }
        let lu = lu_partial_pivot(&a).unwrap();
        let b: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
        let opts = GmresOptions { tol: 1e-10, ..Default::default() };
        let (_, t) = gmres(|v: &[f64]| a.matvec(v), |v: &[f64]| Ok(lu.solve_vec(v)), &b, &opts).unwrap();
        assert_eq!(t.iterations, 1);
        assert!(t.converged);
    }

    #[test]
    fn diagonal_finite_termination() {
        let d = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = vec![1.0; 5];
        let opts = GmresOptions { tol: 1e-12, ..Default::default() };
        let (x, t) = gmres(|v: &[f64]| v.iter().zip(&d).map(|(a, b)| a * b).collect(), identity, &b, &opts).unwrap();
        assert!(t.converged && t.iterations <= 5, "{t:?}");
        for (xi, di) in x.iter().zip(&d) {
            assert!((xi - 1.0 / di).abs() < 1e-11);
        }
    }

    #[test]
    fn zero_rhs_is_immediate() {
        let (x, t) = gmres(|v: &[f64]| v.to_vec(), identity, &[0.0; 4], &GmresOptions::default()).unwrap();
        assert_eq!(x, vec![0.0; 4]);
        assert!(t.converged);
        assert_eq!(t.iterations, 0);
    }

    #[test]
    fn exhausted_iterations_report_failure() {
        let d: Vec<f64> = (1..=40).map(f64::from).collect();
        let b = vec![1.0; 40];
        let opts = GmresOptions { tol: 1e-12, restart: 3, max_iters: 6 };
        let (_, t) = gmres(|v: &[f64]| v.iter().zip(&d).map(|(a, b)| a * b).collect(), identity, &b, &opts).unwrap();
        assert!(!t.converged);
        assert_eq!(t.iterations, 6);
        assert_eq!(t.restarts, 1);
        assert_eq!(t.residual_history.len(), 7);
    }

    #[test]
    fn rejects_bad_options() {
        let run = |o: GmresOptions| gmres(|v: &[f64]| v.to_vec(), identity, &[1.0], &o);
        assert!(matches!(run(GmresOptions { tol: 0.0, ..Default::default() }), Err(Error::Config(_))));
        assert!(matches!(run(GmresOptions { tol: 1.0, ..Default::default() }), Err(Error::Config(_))));
        assert!(matches!(run(GmresOptions { restart: 0, ..Default::default() }), Err(Error::Config(_))));
        let bad = gmres(|_: &[f64]| vec![0.0; 2], identity, &[1.0], &GmresOptions::default());
        assert!(matches!(bad, Err(Error::Dimension(_))));
    }

    #[test]
    fn csv_export() {
        let (_, t) = gmres(|v: &[f64]| v.to_vec(), identity, &[2.0], &GmresOptions::default()).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("iter,relative_residual\n0,1e0\n1,"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn exact_factorization_needs_one_step() {
        for k in [7, 15, 31] {
            let (a, c) = model_problem(ModelKind::Poisson2d, k).unwrap();
            let f = multifrontal_factorize(&a, Some(&c), &Policy::exact()).unwrap();
            let b: Vec<f64> = (0..a.n_rows()).map(|i| 1.0 + (i % 7) as f64).collect();
            let (x, t) = gmres(|v: &[f64]| a.matvec(v), |v: &[f64]| f.solve(v), &b, &GmresOptions::default()).unwrap();
            assert_eq!(t.iterations, 1, "k={k}");
            assert!(true_residual(&a, &x, &b) <= 1e-8);
        }
    }

    #[test]
    fn blr_preconditioner_k31() {
        let (a, c) = model_problem(ModelKind::Poisson2d, 31).unwrap();
        let policy = Policy {
            threshold_dense: 64,
            compression: Compression::Blr,
            tol: 1e-4,
            ..Policy::default()
        };
        let f = multifrontal_factorize(&a, Some(&c), &policy).unwrap();
        let b = vec![1.0; a.n_rows()];
        let (x, t) = gmres(|v: &[f64]| a.matvec(v), |v: &[f64]| f.solve(v), &b, &GmresOptions::default()).unwrap();
        assert!(t.converged && t.iterations <= 50, "{t:?}");
        assert!(true_residual(&a, &x, &b) <= 1e-8);
    }

    fn cycle_monotone(t: &IterationTrace, restart: usize) -> bool {
        let h = &t.residual_history;
        (0..=t.restarts).all(|c| {
            let s = c * restart;
            h[s..=(s + restart).min(h.len() - 1)].windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-10))
        })
    }

    proptest! {
        #[test]
        fn residual_non_increasing_within_cycles(seed in 0u64..500, restart in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 20;
            let mut a = DenseMatrix::random_normal(n, n, &mut rng);
            for i in 0..n {
                a[(i, i)] += 3.0;
            }
            let b: Vec<f64> = DenseMatrix::random_normal(n, 1, &mut rng).into_vec();
            let opts = GmresOptions { tol: 1e-10, restart, max_iters: 60 };
            let (_, t) = gmres(|v: &[f64]| a.matvec(v), identity, &b, &opts).unwrap();
            prop_assert_eq!(t.residual_history.len(), t.iterations + 1);
            prop_assert!(t.residual_history.iter().all(|r| *r > 0.0));
            prop_assert!(cycle_monotone(&t, restart));
        }
    }
}
