//! Nested dissection by coordinate or BFS-grown graph bisection.

use std::collections::VecDeque;

use super::{Point, SparseMatrix};
use crate::error::{Error, Result};

pub const DEFAULT_LEAF_CUTOFF: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct SeparatorNode {
    /// Original vertex indices, ascending.
    pub vertices: Vec<usize>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub level: usize,
}

/// Node 0 is the root separator; leaves hold whole regions.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatorTree {
    pub nodes: Vec<SeparatorNode>,
}

impl SeparatorTree {
    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.level + 1).max().unwrap_or(0)
    }

    /// Vertices of the subtree rooted at `node`.
    pub fn subtree_vertices(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(t) = stack.pop() {
            out.extend_from_slice(&self.nodes[t].vertices);
            stack.extend(self.nodes[t].children.iter().copied());
        }
        out.sort_unstable();
        out
    }
}

/// Orders `A`'s symmetrized graph so every separator follows both of its
/// regions. Returns `p_col` with `p_col[new] = old`.
pub fn nested_dissection(
    a: &SparseMatrix,
    coords: Option<&[Point]>,
    leaf_cutoff: usize,
) -> Result<(Vec<usize>, SeparatorTree)> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("ordering needs a square matrix, got {}x{}", a.n_rows(), a.n_cols())));
    }
    let n = a.n_rows();
    if let Some(c) = coords {
        if c.len() != n {
            return Err(Error::Dimension(format!("{} coordinates for {n} vertices", c.len())));
        }
    }
    let adj = a.symmetric_adjacency();
    let mut d = Dissector {
        adj: &adj,
        coords,
        leaf_cutoff: leaf_cutoff.max(1),
        mark: vec![usize::MAX; n],
        stamp: 0,
        nodes: Vec::new(),
        perm: Vec::with_capacity(n),
    };
    d.dissect((0..n).collect(), None, 0);
    Ok((d.perm, SeparatorTree { nodes: d.nodes }))
}

struct Dissector<'a> {
    adj: &'a [Vec<usize>],
    coords: Option<&'a [Point]>,
    leaf_cutoff: usize,
    mark: Vec<usize>,
    stamp: usize,
    nodes: Vec<SeparatorNode>,
    perm: Vec<usize>,
}

impl Dissector<'_> {
    fn new_node(&mut self, parent: Option<usize>, level: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(SeparatorNode {
            vertices: Vec::new(),
            parent,
            children: Vec::new(),
            level,
        });
        if let Some(p) = parent {
            self.nodes[p].children.push(id);
        }
        id
    }

    fn dissect(&mut self, mut region: Vec<usize>, parent: Option<usize>, level: usize) {
        region.sort_unstable();
        let id = self.new_node(parent, level);
        let split = if region.len() > self.leaf_cutoff { self.bisect(&region) } else { None };
        match split {
            None => {
                self.perm.extend_from_slice(&region);
                self.nodes[id].vertices = region;
            }
            Some((left, right, sep)) => {
                self.dissect(left, Some(id), level + 1);
                self.dissect(right, Some(id), level + 1);
                self.perm.extend_from_slice(&sep);
                self.nodes[id].vertices = sep;
            }
        }
    }

    /// Returns `(left, right, separator)` or `None` for a degenerate split.
    fn bisect(&mut self, region: &[usize]) -> Option<(Vec<usize>, Vec<usize>, Vec<usize>)> {
        self.stamp += 1;
        let in_region = self.stamp;
        for &v in region {
            self.mark[v] = in_region;
        }
        let left = match self.coords {
            Some(c) => coordinate_half(region, c),
            None => self.bfs_half(region, in_region),
        };
        self.stamp += 1;
        let in_left = self.stamp;
        for &v in &left {
            self.mark[v] = in_left;
        }
        let mut sep = Vec::new();
        let mut right = Vec::new();
        for &v in region {
            if self.mark[v] == in_left {
                continue;
            }
            if self.adj[v].iter().any(|&w| self.mark[w] == in_left) {
                sep.push(v);
            } else {
                right.push(v);
            }
        }
        if left.is_empty() || right.is_empty() {
            return None;
        }
        Some((left, right, sep))
    }

    fn bfs_half(&mut self, region: &[usize], in_region: usize) -> Vec<usize> {
        self.stamp += 1;
        let grown = self.stamp;
        let target = region.len() / 2;
        let mut set = Vec::with_capacity(target);
        let mut queue = VecDeque::new();
        let mut next_seed = 0;
        while set.len() < target {
            if queue.is_empty() {
                while self.mark[region[next_seed]] != in_region {
                    next_seed += 1;
                }
                let s = region[next_seed];
                self.mark[s] = grown;
                queue.push_back(s);
            }
            let v = queue.pop_front().expect("seeded above");
            set.push(v);
            for &w in &self.adj[v] {
                if self.mark[w] == in_region {
                    self.mark[w] = grown;
                    queue.push_back(w);
                }
            }
        }
        set
    }
}

fn coordinate_half(region: &[usize], c: &[Point]) -> Vec<usize> {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &v in region {
        for d in 0..3 {
            lo[d] = lo[d].min(c[v][d]);
            hi[d] = hi[d].max(c[v][d]);
        }
    }
    let axis = (0..3).fold(0, |best, d| if hi[d] - lo[d] > hi[best] - lo[best] { d } else { best });
    let mut vals: Vec<f64> = region.iter().map(|&v| c[v][axis]).collect();
    vals.sort_by(f64::total_cmp);
    let median = vals[vals.len() / 2];
    let left: Vec<usize> = region.iter().copied().filter(|&v| c[v][axis] < median).collect();
    if !left.is_empty() {
        return left;
    }
    // Ties fill the lower half: split by position along the axis.
    let mut order = region.to_vec();
    order.sort_by(|&a, &b| c[a][axis].total_cmp(&c[b][axis]).then(a.cmp(&b)));
    order.truncate(region.len() / 2);
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{model_problem, ModelKind};

    fn disconnected(adj: &[Vec<usize>], a: &[usize], b: &[usize]) -> bool {
        let mut allowed = vec![0u8; adj.len()];
        for &v in a {
            allowed[v] = 1;
        }
        for &v in b {
            allowed[v] = 2;
        }
        let mut seen = vec![false; adj.len()];
        let mut stack: Vec<usize> = a.to_vec();
        for &v in a {
            seen[v] = true;
        }
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if allowed[w] == 2 {
                    return false;
                }
                if allowed[w] == 1 && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        true
    }

    fn check_tree(a: &SparseMatrix, perm: &[usize], tree: &SeparatorTree) {
        let n = a.n_rows();
        crate::sparse::check_permutation(perm, n).unwrap();
        let mut count = vec![0; n];
        for node in &tree.nodes {
            for &v in &node.vertices {
                count[v] += 1;
            }
        }
        assert!(count.iter().all(|&c| c == 1), "node vertex sets must partition");
        let pos = crate::sparse::invert_permutation(perm);
        let adj = a.symmetric_adjacency();
        for (id, node) in tree.nodes.iter().enumerate() {
            if let [l, r] = node.children[..] {
                let lv = tree.subtree_vertices(l);
                let rv = tree.subtree_vertices(r);
                assert!(disconnected(&adj, &lv, &rv), "node {id} does not separate");
                let last_region = lv.iter().chain(&rv).map(|&v| pos[v]).max().unwrap();
                assert!(node.vertices.iter().all(|&v| pos[v] > last_region));
            }
        }
    }

    #[test]
    fn grid_three_by_three() {
        let (a, c) = model_problem(ModelKind::Poisson2d, 3).unwrap();
        let (perm, tree) = nested_dissection(&a, Some(&c), 3).unwrap();
        assert_eq!(tree.nodes[0].vertices, vec![1, 4, 7]);
        assert_eq!(tree.nodes[0].children.len(), 2);
        for &ch in &tree.nodes[0].children {
            assert_eq!(tree.nodes[ch].vertices.len(), 3);
        }
        check_tree(&a, &perm, &tree);
    }

    #[test]
    fn path_of_three() {
        let a = SparseMatrix::from_triplets(
            3,
            3,
            &[(0, 0, 2.0), (1, 1, 2.0), (2, 2, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 2, -1.0), (2, 1, -1.0)],
        )
        .unwrap();
        let (perm, tree) = nested_dissection(&a, None, 1).unwrap();
        assert_eq!(tree.nodes[0].vertices, vec![1]);
        assert_eq!(perm, vec![0, 2, 1]);
    }

    #[test]
    fn tiny_graph_is_one_leaf() {
        let (perm, tree) = nested_dissection(&SparseMatrix::identity(5), None, 64).unwrap();
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(perm, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn separators_hold_and_depth_is_bounded() {
        for k in [7usize, 16, 31] {
            let (a, c) = model_problem(ModelKind::Poisson2d, k).unwrap();
            for coords in [Some(&c[..]), None] {
                let cutoff = 16;
                let (perm, tree) = nested_dissection(&a, coords, cutoff).unwrap();
                check_tree(&a, &perm, &tree);
                let bound = ((k * k) as f64 / cutoff as f64).log2().ceil() as usize + 1;
                assert!(tree.depth() <= bound, "k={k} depth {} > {bound}", tree.depth());
            }
        }
        let (a, c) = model_problem(ModelKind::Poisson3d, 8).unwrap();
        let (perm, tree) = nested_dissection(&a, Some(&c), 16).unwrap();
        check_tree(&a, &perm, &tree);
    }
}
