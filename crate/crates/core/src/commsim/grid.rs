use serde::Serialize;

use crate::error::{Error, Result};

/// Logical `px × py × pz` grid: `pz` layers of `px × py` 2D grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProcessGrid3D {
    pub px: usize,
    pub py: usize,
    pub pz: usize,
}

impl ProcessGrid3D {
    pub fn new(px: usize, py: usize, pz: usize) -> Result<Self> {
        if px == 0 || py == 0 || pz == 0 {
            return Err(Error::Config(format!("grid {px}x{py}x{pz} has an empty dimension")));
        }
        if !pz.is_power_of_two() {
            return Err(Error::Config(format!("pz = {pz} is not a power of two")));
        }
        px.checked_mul(py)
            .and_then(|v| v.checked_mul(pz))
            .ok_or_else(|| Error::SizeOverflow(format!("grid {px}x{py}x{pz}")))?;
        Ok(Self { px, py, pz })
    }

    /// Splits `p / pz` processes per layer into the most square `px × py`
    /// with `px ≤ py`.
    pub fn from_total(p: usize, pz: usize) -> Result<Self> {
        if pz == 0 || !p.is_multiple_of(pz) {
            return Err(Error::Config(format!("P = {p} is not divisible by pz = {pz}")));
        }
        let layer = p / pz;
        let mut px = (layer as f64).sqrt() as usize;
        while px > 1 && !layer.is_multiple_of(px) {
            px -= 1;
        }
        Self::new(px.max(1), layer / px.max(1), pz)
    }

    pub fn per_layer(&self) -> usize {
        self.px * self.py
    }

    pub fn total(&self) -> usize {
        self.px * self.py * self.pz
    }

    /// Parses `px,py,pz`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<usize> = spec
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Config(format!("grid {spec:?} is not px,py,pz")))?;
        match parts[..] {
            [px, py, pz] => Self::new(px, py, pz),
            _ => Err(Error::Config(format!("grid {spec:?} is not px,py,pz"))),
        }
    }
}
