use serde::Serialize;

use crate::error::{Error, Result};

/// Model-problem class: 2D PDEs give planar graphs, 3D PDEs non-planar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Planar,
    Nonplanar,
}

impl std::str::FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "planar" => Ok(Problem::Planar),
            "nonplanar" | "non-planar" => Ok(Problem::Nonplanar),
            _ => Err(Error::Config(format!("unknown problem class {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SptrsvAsymptotics {
    pub cost_2d: f64,
    pub cost_3d: f64,
    pub avg_volume_2d: f64,
    pub avg_volume_3d: f64,
    pub max_volume_2d: f64,
    pub max_volume_3d: f64,
}

/// Per-process magnitudes with every hidden constant set to one; logs
/// are base 2. Notional only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Asymptotics {
    pub flops: f64,
    pub w_2d: f64,
    pub w_3d: f64,
    pub m_2d: f64,
    pub m_3d: f64,
    pub l_2d: f64,
    pub l_3d: f64,
    pub sptrsv: SptrsvAsymptotics,
}

fn a() -> f64 {
    2f64.powf(1.0 / 3.0)
}

pub fn kappa1() -> f64 {
    let a = a();
    2.0 * (a - 1.0) / (a.powi(4) - 1.0)
}

pub fn kappa2() -> f64 {
    let a = a();
    a / (a + 1.0)
}

pub fn eval_asymptotics(problem: Problem, n: f64, p: f64, pz: f64) -> Result<Asymptotics> {
    if !(n >= 1.0 && p >= 1.0 && pz >= 1.0) || !(n + p + pz).is_finite() {
        return Err(Error::Config(format!("asymptotics need finite n, P, pz >= 1; got {n}, {p}, {pz}")));
    }
    let log = f64::log2;
    let sp = p.sqrt();
    let spz = pz.sqrt();
    let spzp = (pz * p).sqrt();
    Ok(match problem {
        Problem::Planar => Asymptotics {
            flops: n.powf(1.5) / p,
            w_2d: n * log(n) / sp,
            w_3d: n / sp * (2.0 * spz + log(n) / spz) + 2.0 * n * pz * log(pz) / p,
            m_2d: n / p * log(n),
            m_3d: n / p * (log(n / pz) + pz),
            l_2d: n,
            l_3d: n / pz + n.sqrt(),
            sptrsv: SptrsvAsymptotics {
                cost_2d: n / sp + n.sqrt(),
                cost_3d: n / spzp + n.sqrt(),
                avg_volume_2d: n / sp,
                avg_volume_3d: n / spzp,
                max_volume_2d: n / sp,
                max_volume_3d: n / spzp + (n * pz).sqrt() / sp,
            },
        },
        Problem::Nonplanar => {
            let k1 = kappa1();
            let w2 = n.powf(4.0 / 3.0) / sp;
            let m2 = n.powf(4.0 / 3.0) / p;
            let n23 = n.powf(2.0 / 3.0);
            Asymptotics {
                flops: n * n / p,
                w_2d: w2,
                w_3d: w2 * (k1 * spz + (1.0 - k1) / pz.powf(5.0 / 6.0)) + w2 * (k1 * pz * log(pz) / sp),
                m_2d: m2,
                m_3d: m2 * (pz + 1.0 / pz.powf(4.0 / 3.0)),
                l_2d: n,
                l_3d: n * (kappa2() * n.powf(-1.0 / 3.0) + 1.0 / pz),
                sptrsv: SptrsvAsymptotics {
                    cost_2d: n / sp + n23,
                    cost_3d: n / spzp + n23,
                    avg_volume_2d: n / sp,
                    avg_volume_3d: n / spzp,
                    max_volume_2d: n / sp,
                    max_volume_3d: n / spzp + n23 * spz / sp,
                },
            }
        }
    })
}

/// Planar bound `F / √M` with `F = n^{3/2}/P` and `M = n log n / P`.
pub fn lower_bound(n: f64, p: f64) -> f64 {
    let f = n.powf(1.5) / p;
    let m = n * n.log2() / p;
    f / m.sqrt()
}
