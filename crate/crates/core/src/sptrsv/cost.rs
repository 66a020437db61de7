use serde::Serialize;

use super::dag::TaskDag;
use crate::error::{Error, Result};

/// α-β-γ machine parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MachineModel {
    /// Seconds per message.
    pub alpha: f64,
    /// Seconds per transferred scalar.
    pub beta: f64,
    /// Seconds per flop.
    pub gamma: f64,
}

impl MachineModel {
    pub const BYTES_PER_SCALAR: f64 = 8.0;

    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= 0.0 && gamma >= 0.0) || !(alpha + beta + gamma).is_finite() {
            return Err(Error::Config(format!("machine model needs finite non-negative α, β, γ; got {alpha}, {beta}, {gamma}")));
        }
        Ok(Self { alpha, beta, gamma })
    }
}

impl Default for MachineModel {
    fn default() -> Self {
        Self {
            alpha: 1.7e-6,
            beta: 4e-11 * Self::BYTES_PER_SCALAR,
            gamma: 1e-11,
        }
    }
}

/// `Sync` adds a barrier of `α·log₂P` per level; `Async` omits it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CostMode {
    #[default]
    Async,
    Sync,
}

/// Longest weighted path: vertex flops times γ, plus `α + scalars·β` on
/// every edge whose endpoints live on different processes.
pub fn critical_path_cost(dag: &TaskDag, model: &MachineModel, partition: &[usize], mode: CostMode) -> Result<f64> {
    let n = dag.n_vertices();
    if partition.len() != n {
        return Err(Error::Dimension(format!("partition of length {} for {n} tasks", partition.len())));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (dag.levels[v], v));
    let preds = dag.predecessors();
    let mut finish = vec![0.0f64; n];
    for &v in &order {
        let mut start = 0.0f64;
        for &k in &preds[v] {
            let e = &dag.edges[k];
            let comm = if partition[e.from] != partition[v] {
                model.alpha + e.scalars as f64 * model.beta
            } else {
                0.0
            };
            start = start.max(finish[e.from] + comm);
        }
        finish[v] = start + dag.flops[v] * model.gamma;
    }
    let mut cost = finish.iter().copied().fold(0.0, f64::max);
    if mode == CostMode::Sync {
        let mut procs = partition.to_vec();
        procs.sort_unstable();
        procs.dedup();
        cost += dag.n_levels() as f64 * model.alpha * (procs.len().max(1) as f64).log2();
    }
    Ok(cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sptrsv::Edge;
    use proptest::prelude::*;

    fn chain(k: usize, scalars: usize) -> TaskDag {
        let edges = (1..k).map(|i| Edge { from: i - 1, to: i, scalars }).collect();
        TaskDag::from_parts((0..k).map(|i| i..i + 1).collect(), vec![1.0; k], edges).unwrap()
    }

    #[test]
    fn single_process_is_pure_flops() {
        let m = MachineModel::default();
        let c = critical_path_cost(&chain(3, 10), &m, &[0, 0, 0], CostMode::Sync).unwrap();
        assert_eq!(c, 3.0 * m.gamma);
    }

    #[test]
    fn one_crossing_edge() {
        let m = MachineModel::default();
        assert_eq!(m.beta, 3.2e-10);
        let c = critical_path_cost(&chain(3, 10), &m, &[0, 0, 1], CostMode::Async).unwrap();
        let want = 3.0 * m.gamma + m.alpha + 10.0 * m.beta;
        assert!((c - want).abs() <= 1e-15 * want);
    }

    #[test]
    fn independent_chains_take_the_max() {
        let e = |from, to| Edge { from, to, scalars: 4 };
        let dag = TaskDag::from_parts((0..5).map(|i| i..i + 1).collect(), vec![1.0, 1.0, 2.0, 2.0, 2.0], vec![e(0, 1), e(2, 3), e(3, 4)]).unwrap();
        let m = MachineModel::default();
        let c = critical_path_cost(&dag, &m, &[0, 1, 2, 3, 4], CostMode::Async).unwrap();
        let a = 2.0 * m.gamma + m.alpha + 4.0 * m.beta;
        let b = 6.0 * m.gamma + 2.0 * (m.alpha + 4.0 * m.beta);
        assert_eq!(c, a.max(b));
    }

    #[test]
    fn bad_model_is_config_error() {
        assert!(matches!(MachineModel::new(-1.0, 0.0, 0.0), Err(Error::Config(_))));
    }

    proptest! {
        #[test]
        fn monotone_in_parameters_and_cuts(
            a in 0.0f64..1e-5, b in 0.0f64..1e-9, g in 0.0f64..1e-10,
            da in 0.0f64..1e-5, db in 0.0f64..1e-9, dg in 0.0f64..1e-10,
            cut in 0usize..7, sync in any::<bool>(),
        ) {
            let dag = chain(8, 5);
            let mode = if sync { CostMode::Sync } else { CostMode::Async };
            let part: Vec<usize> = (0..8).map(|v| usize::from(v > cut)).collect();
            let more: Vec<usize> = (0..8).map(|v| usize::from(v > cut) + 2 * usize::from(v > cut + 1)).collect();
            let base = MachineModel::new(a, b, g).unwrap();
            let bigger = MachineModel::new(a + da, b + db, g + dg).unwrap();
            let c0 = critical_path_cost(&dag, &base, &part, mode).unwrap();
            prop_assert!(critical_path_cost(&dag, &bigger, &part, mode).unwrap() >= c0);
            prop_assert!(critical_path_cost(&dag, &base, &more, mode).unwrap() >= c0);
        }
    }
}
