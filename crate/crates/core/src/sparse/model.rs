//! Finite-difference model problems on regular lattices.

use super::SparseMatrix;
use crate::error::{Error, Result};

/// Lattice coordinates; 2D problems leave the third component zero.
pub type Point = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Poisson2d,
    Poisson3d,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poisson2d" => Ok(ModelKind::Poisson2d),
            "poisson3d" => Ok(ModelKind::Poisson3d),
            _ => Err(Error::Config(format!("unknown model problem {s:?}"))),
        }
    }
}

/// Parses `"poisson2d:k"` / `"poisson3d:k"`.
pub fn parse_model_spec(spec: &str) -> Result<(ModelKind, usize)> {
    let (kind, k) = spec
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("model spec {spec:?} is not kind:k")))?;
    let k = k
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("grid size {k:?} is not an integer")))?;
    Ok((kind.parse()?, k))
}

/// Standard 5-point (2D) or 7-point (3D) Laplacian with Dirichlet
/// truncation at the boundary, vertices numbered x fastest.
pub fn model_problem(kind: ModelKind, k: usize) -> Result<(SparseMatrix, Vec<Point>)> {
    if k < 2 {
        return Err(Error::Config(format!("grid size must be at least 2, got {k}")));
    }
    let dims = match kind {
        ModelKind::Poisson2d => 2,
        ModelKind::Poisson3d => 3,
    };
    let overflow = || Error::SizeOverflow(format!("{k}^{dims} vertices do not fit in usize"));
    let mut n = 1usize;
    for _ in 0..dims {
        n = n.checked_mul(k).ok_or_else(overflow)?;
    }
    n.checked_mul(2 * dims + 1).ok_or_else(overflow)?;
    let kz = if dims == 3 { k } else { 1 };
    let diag = (2 * dims) as f64;
    let mut trip = Vec::with_capacity(n * (2 * dims + 1));
    let mut coords = Vec::with_capacity(n);
    for z in 0..kz {
        for y in 0..k {
            for x in 0..k {
                let v = x + k * (y + k * z);
                coords.push([x as f64, y as f64, z as f64]);
                trip.push((v, v, diag));
                if x > 0 {
                    trip.push((v, v - 1, -1.0));
                }
                if x + 1 < k {
                    trip.push((v, v + 1, -1.0));
                }
                if y > 0 {
                    trip.push((v, v - k, -1.0));
                }
                if y + 1 < k {
                    trip.push((v, v + k, -1.0));
                }
                if z > 0 {
                    trip.push((v, v - k * k, -1.0));
                }
                if z + 1 < kz {
                    trip.push((v, v + k * k, -1.0));
                }
            }
        }
    }
    Ok((SparseMatrix::from_triplets(n, n, &trip)?, coords))
}
