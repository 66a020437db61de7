//! Kernel matrices used as compression test problems.

use crate::dense::DenseMatrix;
use crate::sparse::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    /// `exp(-|x - y|² / (2σ²))`.
    Gaussian { sigma: f64 },
    /// `1 / (4π|x - y|)`, regularized on the diagonal.
    Laplace3d,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub points: Vec<Point>,
    laplace_diag: f64,
}

fn dist(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

impl KernelSpec {
    pub fn gaussian(points: Vec<Point>, sigma: f64) -> Self {
        assert!(sigma > 0.0, "sigma must be positive");
        Self {
            kind: KernelKind::Gaussian { sigma },
            points,
            laplace_diag: 0.0,
        }
    }

    /// The diagonal is `2 / (4π h)` with `h` the minimum distance
    /// between distinct points.
    pub fn laplace3d(points: Vec<Point>) -> Self {
        let mut h = f64::INFINITY;
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let d = dist(&points[i], &points[j]);
                if d > 0.0 {
                    h = h.min(d);
                }
            }
        }
        let laplace_diag = if h.is_finite() { 2.0 / (4.0 * std::f64::consts::PI * h) } else { 1.0 };
        Self {
            kind: KernelKind::Laplace3d,
            points,
            laplace_diag,
        }
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let d = dist(&self.points[i], &self.points[j]);
        match self.kind {
            KernelKind::Gaussian { sigma } => (-d * d / (2.0 * sigma * sigma)).exp(),
            KernelKind::Laplace3d => {
                if i == j || d == 0.0 {
                    self.laplace_diag
                } else {
                    1.0 / (4.0 * std::f64::consts::PI * d)
                }
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n(), self.n(), |i, j| self.entry(i, j))
    }
}
