use std::time::Instant;

use super::front::{extend_add, factor_front, FrontFactor, FrontalMatrix, Policy, UpdateMatrix};
use super::stats::{FactorStats, NodeStats, Timings};
use super::tree::{build_assembly_tree, AssemblyTree};
use crate::error::{Error, Result};
use crate::sparse::{
    equilibrate, invert_permutation, nested_dissection, symbolic_factorize, EliminationStructure, Point, SparseMatrix,
    DEFAULT_LEAF_CUTOFF,
};

/// Picks the next node to factor from the ready set.
pub trait Scheduler {
    fn pick(&mut self, ready: &[usize]) -> usize;
}

/// Always takes the smallest ready node id, which reproduces the
/// postorder.
#[derive(Debug, Default, Clone, Copy)]
pub struct Sequential;

impl Scheduler for Sequential {
    fn pick(&mut self, ready: &[usize]) -> usize {
        *ready.iter().min().expect("ready set is non-empty")
    }
}

/// Drives assembly and factorization over the assembly tree. A node is
/// ready once every child has delivered its update.
pub struct Engine<'a> {
    b: SparseMatrix,
    bt: SparseMatrix,
    tree: &'a AssemblyTree,
    policy: Policy,
    coords: Option<Vec<Point>>,
    pending: Vec<Option<UpdateMatrix>>,
    waiting: Vec<usize>,
    ready: Vec<usize>,
    fronts: Vec<Option<FrontFactor>>,
    node_stats: Vec<NodeStats>,
    flops: f64,
    pos: Vec<usize>,
}

impl<'a> Engine<'a> {
    /// `b` is the matrix already in elimination order; `coords`, when
    /// given, are indexed the same way.
    pub fn new(b: SparseMatrix, tree: &'a AssemblyTree, policy: Policy, coords: Option<Vec<Point>>) -> Self {
        let m = tree.len();
        let waiting: Vec<usize> = tree.nodes.iter().map(|n| n.children.len()).collect();
        let ready = (0..m).filter(|&i| waiting[i] == 0).collect();
        Self {
            bt: b.transpose(),
            pos: vec![usize::MAX; b.n_rows()],
            b,
            tree,
            policy,
            coords,
            pending: vec![None; m],
            waiting,
            ready,
            fronts: vec![None; m],
            node_stats: vec![NodeStats::default(); m],
            flops: 0.0,
        }
    }

    pub fn ready_nodes(&self) -> &[usize] {
        &self.ready
    }

    /// Builds the dense front of `node` from the original entries and
    /// the children's updates, consuming the latter.
    pub fn assemble(&mut self, node: usize) -> Result<FrontalMatrix> {
        let tn = &self.tree.nodes[node];
        let idx = tn.indices();
        let ns = tn.fully_summed.len();
        let mut front = FrontalMatrix::zeros(node, idx, ns);
        for (k, &g) in front.indices.iter().enumerate() {
            self.pos[g] = k;
        }
        let (s0, s1) = match (tn.fully_summed.first(), tn.fully_summed.last()) {
            (Some(&a), Some(&b)) => (a, b + 1),
            _ => (0, 0),
        };
        let mut outcome = Ok(());
        for j in s0..s1 {
            let lj = self.pos[j];
            let (rows, vals) = self.b.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                if i < s0 {
                    continue;
                }
                match self.pos.get(i).copied().filter(|&p| p < front.indices.len() && front.indices[p] == i) {
                    Some(li) => front.data[(li, lj)] += v,
                    None => outcome = Err(Error::Structure(format!("entry ({i}, {j}) falls outside front {node}"))),
                }
            }
            let (cols, vals) = self.bt.col(j);
            for (&c, &v) in cols.iter().zip(vals) {
                if c < s1 {
                    continue;
                }
                match self.pos.get(c).copied().filter(|&p| p < front.indices.len() && front.indices[p] == c) {
                    Some(lc) => front.data[(lj, lc)] += v,
                    None => outcome = Err(Error::Structure(format!("entry ({j}, {c}) falls outside front {node}"))),
                }
            }
        }
        for &g in &front.indices {
            self.pos[g] = usize::MAX;
        }
        outcome?;
        for &c in &tn.children {
            let t = self.pending[c]
                .take()
                .ok_or_else(|| Error::Structure(format!("child {c} of node {node} has no update")))?;
            extend_add(&mut front, &t)?;
        }
        Ok(front)
    }

    /// Factors an assembled front and releases its parent when all
    /// siblings are done.
    pub fn factor_assembled(&mut self, front: FrontalMatrix) -> Result<()> {
        let node = front.node;
        let points: Option<Vec<Point>> =
            self.coords.as_ref().map(|c| self.tree.nodes[node].fully_summed.iter().map(|&i| c[i]).collect());
        let (ns, nu) = (front.n_s, front.n_u());
        let ff = factor_front(front, &self.policy, points.as_deref())?;
        self.flops += ff.flops;
        self.node_stats[node] = NodeStats {
            n_s: ns,
            n_u: nu,
            representation: ff.factor.representation(),
            max_rank: ff.factor.max_rank(),
            entries: ff.factor.storage(),
        };
        self.fronts[node] = Some(ff.factor);
        self.ready.retain(|&r| r != node);
        if let Some(p) = self.tree.nodes[node].parent {
            self.pending[node] = Some(ff.update);
            self.waiting[p] -= 1;
            if self.waiting[p] == 0 {
                self.ready.push(p);
            }
        }
        Ok(())
    }

    pub fn run(mut self, scheduler: &mut dyn Scheduler) -> Result<(Vec<FrontFactor>, Vec<NodeStats>, f64)> {
        while !self.ready.is_empty() {
            let node = scheduler.pick(&self.ready);
            let front = self.assemble(node)?;
            self.factor_assembled(front)?;
        }
        let fronts = self
            .fronts
            .into_iter()
            .enumerate()
            .map(|(i, f)| f.ok_or_else(|| Error::Structure(format!("node {i} was never factored"))))
            .collect::<Result<Vec<_>>>()?;
        Ok((fronts, self.node_stats, self.flops))
    }
}

/// Complete factorization: scaling, ordering, tree and per-front factors.
#[derive(Debug, Clone)]
pub struct MultifrontalFactor {
    pub n: usize,
    pub d_row: Vec<f64>,
    pub d_col: Vec<f64>,
    /// `perm[new] = old`.
    pub perm: Vec<usize>,
    pub tree: AssemblyTree,
    pub fronts: Vec<FrontFactor>,
    pub stats: FactorStats,
}

/// Equilibrates, orders by nested dissection (geometric when `coords`
/// is given), analyzes and factors `a`.
pub fn multifrontal_factorize(a: &SparseMatrix, coords: Option<&[Point]>, policy: &Policy) -> Result<MultifrontalFactor> {
    let t0 = Instant::now();
    if !a.is_square() {
        return Err(Error::Dimension(format!("factorization needs a square matrix, got {}x{}", a.n_rows(), a.n_cols())));
    }
    let eq = equilibrate(&a.clone())?;
    let (p, _) = nested_dissection(&eq.scaled, coords, DEFAULT_LEAF_CUTOFF)?;
    let es = symbolic_factorize(&eq.scaled, &p)?;
    let analysis = t0.elapsed().as_secs_f64();
    factorize_with_structure(&eq.scaled, eq.d_row, eq.d_col, &es, coords, policy, analysis)
}

/// Numeric phase for a given elimination structure. `scaled` is the
/// already-scaled matrix in its original order.
pub fn factorize_with_structure(
    scaled: &SparseMatrix,
    d_row: Vec<f64>,
    d_col: Vec<f64>,
    es: &EliminationStructure,
    coords: Option<&[Point]>,
    policy: &Policy,
    analysis_seconds: f64,
) -> Result<MultifrontalFactor> {
    let t0 = Instant::now();
    let n = scaled.n_rows();
    let tree = build_assembly_tree(es);
    let b = scaled.permute(&es.perm, &es.perm)?;
    let pc = coords.map(|c| es.perm.iter().map(|&o| c[o]).collect());
    let engine = Engine::new(b, &tree, *policy, pc);
    let (fronts, nodes, flops) = engine.run(&mut Sequential)?;
    let factor_seconds = t0.elapsed().as_secs_f64();
    let entries = nodes.iter().map(|s| s.entries).sum();
    let stats = FactorStats {
        n,
        nnz: scaled.nnz(),
        fill: entries,
        peak_front: tree.peak_front(),
        flops,
        nodes,
        timings: Some(Timings {
            analysis_seconds,
            factor_seconds,
        }),
    };
    Ok(MultifrontalFactor {
        n,
        d_row,
        d_col,
        perm: es.perm.clone(),
        tree,
        fronts,
        stats,
    })
}

impl MultifrontalFactor {
    /// Solves `A x = b` with the (possibly approximate) factors.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::Dimension(format!("right-hand side of length {} for n = {}", b.len(), self.n)));
        }
        let mut z: Vec<f64> = self.perm.iter().map(|&o| self.d_row[o] * b[o]).collect();
        self.forward(&mut z);
        self.backward(&mut z);
        let mut x = vec![0.0; self.n];
        for (i, &o) in self.perm.iter().enumerate() {
            x[o] = self.d_col[o] * z[i];
        }
        Ok(x)
    }

    /// Lower sweep in elimination order.
    pub fn forward(&self, z: &mut [f64]) {
        for (node, f) in self.tree.nodes.iter().zip(&self.fronts) {
            let mut xs: Vec<f64> = node.fully_summed.iter().map(|&i| z[i]).collect();
            let mut xu: Vec<f64> = node.update.iter().map(|&i| z[i]).collect();
            f.forward(&mut xs, &mut xu);
            for (&i, v) in node.fully_summed.iter().zip(xs) {
                z[i] = v;
            }
            for (&i, v) in node.update.iter().zip(xu) {
                z[i] = v;
            }
        }
    }

    /// Upper sweep in reverse elimination order.
    pub fn backward(&self, z: &mut [f64]) {
        for (node, f) in self.tree.nodes.iter().zip(&self.fronts).rev() {
            let mut xs: Vec<f64> = node.fully_summed.iter().map(|&i| z[i]).collect();
            let xu: Vec<f64> = node.update.iter().map(|&i| z[i]).collect();
            f.backward(&mut xs, &xu);
            for (&i, v) in node.fully_summed.iter().zip(xs) {
                z[i] = v;
            }
        }
    }

    /// Column ranges of the fronts in elimination numbering.
    pub fn supernodes(&self) -> Vec<std::ops::Range<usize>> {
        self.tree
            .nodes
            .iter()
            .map(|n| match (n.fully_summed.first(), n.fully_summed.last()) {
                (Some(&a), Some(&b)) => a..b + 1,
                _ => 0..0,
            })
            .collect()
    }

    /// Global unit-lower factor `L` and row order `q` (`q[new] = old`,
    /// in elimination numbering) such that the lower sweep equals
    /// `L⁻¹ (z[q])`. Only available when every front is dense.
    pub fn lower_factor(&self) -> Option<(SparseMatrix, Vec<usize>)> {
        let mut q: Vec<usize> = (0..self.n).collect();
        for (node, f) in self.tree.nodes.iter().zip(&self.fronts) {
            let FrontFactor::Dense { lu, .. } = f else { return None };
            for (k, &p) in lu.perm().iter().enumerate() {
                q[node.fully_summed[k]] = node.fully_summed[p];
            }
        }
        let qinv = invert_permutation(&q);
        let mut t = Vec::new();
        for (node, f) in self.tree.nodes.iter().zip(&self.fronts) {
            let FrontFactor::Dense { lu, f21, .. } = f else { return None };
            let packed = lu.packed();
            for (c, &gc) in node.fully_summed.iter().enumerate() {
                t.push((gc, gc, 1.0));
                for r in c + 1..node.fully_summed.len() {
                    let v = packed[(r, c)];
                    if v != 0.0 {
                        t.push((node.fully_summed[r], gc, v));
                    }
                }
                for (r, &gr) in node.update.iter().enumerate() {
                    let v = f21[(r, c)];
                    if v != 0.0 {
                        t.push((qinv[gr], gc, v));
                    }
                }
            }
        }
        Some((SparseMatrix::from_triplets(self.n, self.n, &t).expect("indices in range"), q))
    }
}
