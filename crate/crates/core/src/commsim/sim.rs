use serde::Serialize;

use super::grid::ProcessGrid3D;
use super::mapping::{EtreeView, TreeMapping};
use crate::error::{Error, Result};
use crate::sptrsv::MachineModel;

/// Per-process totals. Shares within a layer are spread evenly, so the
/// values may be fractional.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ProcessCounts {
    /// Scalars received, intra- and inter-layer.
    pub volume_scalars: f64,
    pub messages: f64,
    pub memory_scalars: f64,
    pub flops: f64,
    pub inter_layer_sent: f64,
    pub inter_layer_received: f64,
    /// Memory held only because an ancestor is replicated on this layer.
    pub replicated_memory: f64,
}

impl ProcessCounts {
    fn fields(&self) -> [f64; 7] {
        [
            self.volume_scalars,
            self.messages,
            self.memory_scalars,
            self.flops,
            self.inter_layer_sent,
            self.inter_layer_received,
            self.replicated_memory,
        ]
    }

    fn from_fields(f: [f64; 7]) -> Self {
        Self {
            volume_scalars: f[0],
            messages: f[1],
            memory_scalars: f[2],
            flops: f[3],
            inter_layer_sent: f[4],
            inter_layer_received: f[5],
            replicated_memory: f[6],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregate {
    pub max: ProcessCounts,
    pub mean: ProcessCounts,
}

/// One hop of a binomial reduction between two layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Reduction {
    pub node: usize,
    pub phase: usize,
    pub from_layer: usize,
    pub to_layer: usize,
    pub scalars: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommReport {
    pub grid: ProcessGrid3D,
    /// Indexed `layer * px * py + rank_in_layer`.
    pub processes: Vec<ProcessCounts>,
    pub aggregate: Aggregate,
    pub reductions: Vec<Reduction>,
    pub inter_layer_volume: usize,
    pub critical_path_seconds: f64,
}

impl CommReport {
    pub fn layer(&self, layer: usize) -> &ProcessCounts {
        &self.processes[layer * self.grid.per_layer()]
    }

    /// Messages received by `layer` in reduction phase `phase`.
    pub fn received_in_phase(&self, layer: usize, phase: usize) -> usize {
        self.reductions.iter().filter(|r| r.to_layer == layer && r.phase == phase).count()
    }

    pub fn n_phases(&self) -> usize {
        self.reductions.iter().map(|r| r.phase).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Accounting {
    grid: ProcessGrid3D,
    layers: Vec<ProcessCounts>,
    reductions: Vec<Reduction>,
}

impl Accounting {
    fn new(grid: ProcessGrid3D) -> Self {
        Self {
            grid,
            layers: vec![ProcessCounts::default(); grid.pz],
            reductions: Vec::new(),
        }
    }

    fn share(&self, x: f64) -> f64 {
        x / self.grid.per_layer() as f64
    }

    fn reduce(&mut self, node: usize, first: usize, count: usize, scalars: usize) {
        let mut stride = 1;
        let mut phase = 1;
        while stride < count {
            let mut k = 0;
            while k + stride < count {
                let (from, to) = (first + k + stride, first + k);
                self.reductions.push(Reduction {
                    node,
                    phase,
                    from_layer: from,
                    to_layer: to,
                    scalars,
                });
                let v = self.share(scalars as f64);
                self.layers[from].inter_layer_sent += v;
                self.layers[to].inter_layer_received += v;
                self.layers[to].volume_scalars += v;
                self.layers[to].messages += 1.0;
                k += 2 * stride;
            }
            stride *= 2;
            phase += 1;
        }
    }

    fn finish(self, model: &MachineModel) -> CommReport {
        let per = self.grid.per_layer();
        let processes: Vec<ProcessCounts> = self.layers.iter().flat_map(|l| std::iter::repeat_n(*l, per)).collect();
        let p = processes.len() as f64;
        let mut max = [0.0f64; 7];
        let mut sum = [0.0f64; 7];
        for c in &processes {
            for (k, v) in c.fields().iter().enumerate() {
                max[k] = max[k].max(*v);
                sum[k] += v;
            }
        }
        let critical_path_seconds = processes
            .iter()
            .map(|c| c.flops * model.gamma + c.messages * model.alpha + c.volume_scalars * model.beta)
            .fold(0.0, f64::max);
        let inter_layer_volume = self.reductions.iter().map(|r| r.scalars).sum();
        CommReport {
            grid: self.grid,
            processes,
            aggregate: Aggregate {
                max: ProcessCounts::from_fields(max),
                mean: ProcessCounts::from_fields(sum.map(|s| s / p)),
            },
            reductions: self.reductions,
            inter_layer_volume,
            critical_path_seconds,
        }
    }
}

fn check(mapping: &TreeMapping, tree: &EtreeView, grid: &ProcessGrid3D) -> Result<()> {
    if mapping.placement.len() != tree.len() {
        return Err(Error::Dimension(format!("mapping has {} nodes, tree {}", mapping.placement.len(), tree.len())));
    }
    if mapping.pz != grid.pz {
        return Err(Error::Config(format!("mapping built for pz = {}, grid has {}", mapping.pz, grid.pz)));
    }
    Ok(())
}

/// SpLU: 2D panel broadcasts inside the owning layer, binomial
/// reductions of replicated ancestor fronts across layers.
pub fn simulate_splu_comm(mapping: &TreeMapping, tree: &EtreeView, grid: &ProcessGrid3D, model: &MachineModel) -> Result<CommReport> {
    check(mapping, tree, grid)?;
    let mut acc = Accounting::new(*grid);
    let (px, py) = (grid.px as f64, grid.py as f64);
    for v in 0..tree.len() {
        let (s, u) = (tree.s[v] as f64, tree.u[v] as f64);
        let f = s + u;
        let place = mapping.placement[v];
        let owner = place.first;
        let l_panel = f * s;
        let u_panel = s * u;
        let vol = acc.share(l_panel * (py - 1.0) + u_panel * (px - 1.0));
        let msgs = f64::from(u8::from(grid.py > 1)) + f64::from(u8::from(grid.px > 1));
        let flops = acc.share(2.0 / 3.0 * s * s * s + 2.0 * s * s * u + 2.0 * s * u * u);
        let layer = &mut acc.layers[owner];
        layer.volume_scalars += vol;
        layer.messages += msgs;
        layer.flops += flops;
        if place.is_replicated() {
            // Every layer of the set holds a copy of the front; the owner
            // factors in place after the reduction.
            let copy = acc.share(f * f);
            for l in place.first..place.first + place.count {
                acc.layers[l].memory_scalars += copy;
                acc.layers[l].replicated_memory += copy;
            }
            acc.reduce(v, place.first, place.count, (tree.s[v] + tree.u[v]).pow(2));
        } else {
            acc.layers[owner].memory_scalars += acc.share(f * f - u * u);
        }
    }
    Ok(acc.finish(model))
}

/// SpTRSV: solution-piece broadcasts and partial-sum reductions inside
/// layers, one right-hand-side reduction of `|I^s|` scalars per replicated
/// ancestor across layers.
pub fn simulate_sptrsv_comm(mapping: &TreeMapping, tree: &EtreeView, grid: &ProcessGrid3D, model: &MachineModel) -> Result<CommReport> {
    check(mapping, tree, grid)?;
    let mut acc = Accounting::new(*grid);
    let (px, py) = (grid.px as f64, grid.py as f64);
    for v in 0..tree.len() {
        let (s, u) = (tree.s[v] as f64, tree.u[v] as f64);
        let place = mapping.placement[v];
        let coupled = tree.u[v] > 0;
        let vol = if coupled { acc.share(s * (px - 1.0) + u * (py - 1.0)) } else { 0.0 };
        let msgs = if coupled {
            f64::from(u8::from(grid.px > 1)) + f64::from(u8::from(grid.py > 1))
        } else {
            0.0
        };
        let flops = acc.share(s * s + 2.0 * s * u);
        let factor = acc.share(s * s + 2.0 * s * u);
        let layer = &mut acc.layers[place.first];
        layer.volume_scalars += vol;
        layer.messages += msgs;
        layer.flops += flops;
        layer.memory_scalars += factor;
        if place.is_replicated() {
            let copy = acc.share(s);
            for l in place.first..place.first + place.count {
                acc.layers[l].memory_scalars += copy;
                acc.layers[l].replicated_memory += copy;
            }
            acc.reduce(v, place.first, place.count, tree.s[v]);
        }
    }
    Ok(acc.finish(model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commsim::build_3d_mapping;
    use crate::sparse::{model_problem, nested_dissection, symbolic_factorize, ModelKind, SparseMatrix};

    fn run(tree: &EtreeView, grid: ProcessGrid3D) -> (CommReport, CommReport) {
        let m = build_3d_mapping(tree, &grid).unwrap();
        let model = MachineModel::default();
        (
            simulate_splu_comm(&m, tree, &grid, &model).unwrap(),
            simulate_sptrsv_comm(&m, tree, &grid, &model).unwrap(),
        )
    }

    fn poisson_tree(k: usize) -> EtreeView {
        let (a, c) = model_problem(ModelKind::Poisson2d, k).unwrap();
        let (p, _) = nested_dissection(&a, Some(&c), 16).unwrap();
        EtreeView::from_elimination(&symbolic_factorize(&a, &p).unwrap())
    }

    #[test]
    fn single_process_has_no_communication() {
        let (a, c) = model_problem(ModelKind::Poisson2d, 15).unwrap();
        let (p, _) = nested_dissection(&a, Some(&c), 16).unwrap();
        let es = symbolic_factorize(&a, &p).unwrap();
        let (lu, trsv) = run(&EtreeView::from_elimination(&es), ProcessGrid3D::new(1, 1, 1).unwrap());
        for r in [&lu, &trsv] {
            assert_eq!(r.aggregate.max.volume_scalars, 0.0);
            assert_eq!(r.aggregate.max.messages, 0.0);
        }
        assert_eq!(lu.processes[0].memory_scalars, es.predicted_entries() as f64);
    }

    #[test]
    fn pz_one_has_no_inter_layer_terms() {
        let (lu, trsv) = run(&poisson_tree(31), ProcessGrid3D::new(2, 2, 1).unwrap());
        for r in [&lu, &trsv] {
            assert_eq!(r.inter_layer_volume, 0);
            assert!(r.reductions.is_empty());
            assert_eq!(r.aggregate.max.inter_layer_received, 0.0);
        }
    }

    #[test]
    fn seven_node_walkthrough_reductions() {
        let tree = EtreeView::complete_binary(3, 5, 5);
        let (lu, trsv) = run(&tree, ProcessGrid3D::new(1, 1, 4).unwrap());
        for r in [&lu, &trsv] {
            assert_eq!(r.n_phases(), 2);
            assert_eq!(r.received_in_phase(0, 1), 2);
            assert_eq!(r.received_in_phase(2, 1), 2);
            assert_eq!(r.received_in_phase(0, 2), 1);
            let sent: f64 = r.processes.iter().map(|p| p.inter_layer_sent).sum();
            let recv: f64 = r.processes.iter().map(|p| p.inter_layer_received).sum();
            assert_eq!(sent, recv);
        }
        let nodes: Vec<usize> = trsv.reductions.iter().filter(|r| r.to_layer == 0).map(|r| r.node).collect();
        assert_eq!(nodes, vec![0, 0, 1]);
    }

    #[test]
    fn diagonal_matrix_is_silent() {
        let es = symbolic_factorize(&SparseMatrix::identity(8), &(0..8).collect::<Vec<_>>()).unwrap();
        let (_, trsv) = run(&EtreeView::from_elimination(&es), ProcessGrid3D::new(2, 2, 4).unwrap());
        assert_eq!(trsv.aggregate.max.volume_scalars, 0.0);
        assert_eq!(trsv.inter_layer_volume, 0);
    }

    #[test]
    fn three_d_reduces_max_volume() {
        let tree = poisson_tree(63);
        let (flat, _) = run(&tree, ProcessGrid3D::from_total(16, 1).unwrap());
        let (deep, _) = run(&tree, ProcessGrid3D::from_total(16, 4).unwrap());
        assert!(deep.aggregate.max.volume_scalars < flat.aggregate.max.volume_scalars);
    }

    #[test]
    fn replicated_memory_grows_with_pz() {
        let tree = poisson_tree(31);
        let mut prev = -1.0;
        for pz in [1, 2, 4, 8] {
            let (lu, _) = run(&tree, ProcessGrid3D::new(1, 1, pz).unwrap());
            let r = lu.layer(0).replicated_memory;
            assert!(r >= prev);
            prev = r;
        }
    }
}
