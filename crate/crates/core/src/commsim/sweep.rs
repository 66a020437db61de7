use std::fmt::Write as _;

use serde::Serialize;

use super::asymptotics::{eval_asymptotics, Problem};
use super::grid::ProcessGrid3D;
use super::mapping::{build_3d_mapping, EtreeView};
use super::sim::simulate_splu_comm;
use crate::error::{Error, Result};
use crate::sptrsv::MachineModel;

pub const SWEEP_HEADER: &str = "pz,W3d_formula,W2d_formula,W3d_measured,M3d,latency3d";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub pz: usize,
    pub w3d_formula: f64,
    pub w2d_formula: f64,
    /// Simulated max per-process SpLU volume, when a tree was supplied.
    pub w3d_measured: Option<f64>,
    pub m3d: f64,
    pub latency3d: f64,
}

/// Formula values for each `pz`, plus simulated volume when `tree` is
/// given. `n` is taken from the tree when present.
pub fn sweep_pz(problem: Problem, n: f64, p: usize, pz_list: &[usize], tree: Option<&EtreeView>, model: &MachineModel) -> Result<Vec<SweepRow>> {
    let n = match tree {
        Some(t) => t.s.iter().sum::<usize>() as f64,
        None => n,
    };
    pz_list
        .iter()
        .map(|&pz| {
            if !pz.is_power_of_two() {
                return Err(Error::Config(format!("pz = {pz} is not a power of two")));
            }
            let a = eval_asymptotics(problem, n, p as f64, pz as f64)?;
            let w3d_measured = match tree {
                Some(t) => {
                    let grid = ProcessGrid3D::from_total(p, pz)?;
                    let mapping = build_3d_mapping(t, &grid)?;
                    Some(simulate_splu_comm(&mapping, t, &grid, model)?.aggregate.max.volume_scalars)
                }
                None => None,
            };
            Ok(SweepRow {
                pz,
                w3d_formula: a.w_3d,
                w2d_formula: a.w_2d,
                w3d_measured,
                m3d: a.m_3d,
                latency3d: a.l_3d,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        let measured = r.w3d_measured.map(|v| format!("{v:e}")).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{:e},{:e},{},{:e},{:e}",
            r.pz, r.w3d_formula, r.w2d_formula, measured, r.m3d, r.latency3d
        );
    }
    s
}
