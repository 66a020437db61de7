use serde::Serialize;

use super::grid::ProcessGrid3D;
use crate::error::{Error, Result};
use crate::sparse::{EliminationStructure, SeparatorTree};

/// Tree shape plus per-node front sizes (`s` fully summed, `u` update).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtreeView {
    pub parent: Vec<Option<usize>>,
    pub s: Vec<usize>,
    pub u: Vec<usize>,
}

impl EtreeView {
    pub fn from_elimination(es: &EliminationStructure) -> Self {
        let m = es.n_supernodes();
        Self {
            parent: es.parent.clone(),
            s: es.supernodes.iter().map(|r| r.len()).collect(),
            u: (0..m).map(|k| es.update_rows[k].len()).collect(),
        }
    }

    /// Separator tree with `u` taken as the vertex count of all ancestors.
    pub fn from_separator_tree(t: &SeparatorTree) -> Self {
        let parent: Vec<Option<usize>> = t.nodes.iter().map(|n| n.parent).collect();
        let s: Vec<usize> = t.nodes.iter().map(|n| n.vertices.len()).collect();
        let u = (0..s.len())
            .map(|mut v| {
                let mut total = 0;
                while let Some(p) = parent[v] {
                    total += s[p];
                    v = p;
                }
                total
            })
            .collect();
        Self { parent, s, u }
    }

    /// Complete binary tree in heap numbering (root 0, children `2i+1`,
    /// `2i+2`) with the given sizes.
    pub fn complete_binary(levels: u32, s: usize, u_per_level: usize) -> Self {
        let m = (1usize << levels) - 1;
        let parent = (0..m).map(|i| if i == 0 { None } else { Some((i - 1) / 2) }).collect();
        let depth = |i: usize| (usize::BITS - 1 - (i + 1).leading_zeros()) as usize;
        Self {
            parent,
            s: vec![s; m],
            u: (0..m).map(|i| u_per_level * depth(i)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut c = vec![Vec::new(); self.len()];
        for (v, p) in self.parent.iter().enumerate() {
            if let Some(p) = *p {
                c[p].push(v);
            }
        }
        c
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.parent[v].is_none()).collect()
    }

    fn subtree_weight(&self, children: &[Vec<usize>]) -> Vec<f64> {
        let mut w: Vec<f64> = (0..self.len()).map(|v| (self.s[v] * (self.s[v] + self.u[v])) as f64).collect();
        for v in self.order_children_first(children) {
            if let Some(p) = self.parent[v] {
                w[p] += w[v];
            }
        }
        w
    }

    fn order_children_first(&self, children: &[Vec<usize>]) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack: Vec<(usize, bool)> = self.roots().into_iter().rev().map(|r| (r, false)).collect();
        while let Some((v, done)) = stack.pop() {
            if done {
                out.push(v);
            } else {
                stack.push((v, true));
                stack.extend(children[v].iter().rev().map(|&c| (c, false)));
            }
        }
        out
    }
}

/// Layer set `[first, first + count)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NodePlacement {
    pub first: usize,
    pub count: usize,
}

impl NodePlacement {
    pub fn is_replicated(&self) -> bool {
        self.count > 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeMapping {
    pub pz: usize,
    pub placement: Vec<NodePlacement>,
    /// `log2(pz / count)` for replicated nodes; `None` inside layer-local
    /// subtrees.
    pub ancestor_level: Vec<Option<usize>>,
}

impl TreeMapping {
    pub fn layer_nodes(&self, layer: usize) -> Vec<usize> {
        (0..self.placement.len())
            .filter(|&v| {
                let p = self.placement[v];
                !p.is_replicated() && p.first == layer
            })
            .collect()
    }

    pub fn replicated_nodes(&self) -> Vec<usize> {
        (0..self.placement.len()).filter(|&v| self.placement[v].is_replicated()).collect()
    }
}

/// Top `log2(pz)` levels are replicated by halving the layer set at every
/// branching; each remaining subtree is owned by one layer.
pub fn build_3d_mapping(tree: &EtreeView, grid: &ProcessGrid3D) -> Result<TreeMapping> {
    let m = tree.len();
    let children = tree.children();
    let weight = tree.subtree_weight(&children);
    let mut placement = vec![NodePlacement { first: 0, count: 1 }; m];
    let mut level = vec![None; m];
    let mut stack = vec![(tree.roots(), 0usize, grid.pz)];
    while let Some((group, first, count)) = stack.pop() {
        if count == 1 {
            let mut todo = group;
            while let Some(v) = todo.pop() {
                placement[v] = NodePlacement { first, count: 1 };
                todo.extend_from_slice(&children[v]);
            }
            continue;
        }
        match group.len() {
            0 => {
                return Err(Error::Config(format!(
                    "elimination tree too shallow for pz = {}: a branch ends above the layer split",
                    grid.pz
                )))
            }
            1 => {
                let v = group[0];
                placement[v] = NodePlacement { first, count };
                level[v] = Some((grid.pz / count).trailing_zeros() as usize);
                stack.push((children[v].clone(), first, count));
            }
            _ => {
                let (a, b) = split_balanced(&group, &weight);
                let half = count / 2;
                stack.push((b, first + half, half));
                stack.push((a, first, half));
            }
        }
    }
    Ok(TreeMapping {
        pz: grid.pz,
        placement,
        ancestor_level: level,
    })
}

// Greedy split by subtree weight; the heaviest goes to the first half and
// ties keep input order, so two equal children land in index order.
fn split_balanced(group: &[usize], weight: &[f64]) -> (Vec<usize>, Vec<usize>) {
    if group.len() == 2 {
        return (vec![group[0]], vec![group[1]]);
    }
    let mut sorted = group.to_vec();
    sorted.sort_by(|&x, &y| weight[y].total_cmp(&weight[x]).then(x.cmp(&y)));
    let (mut a, mut b) = (Vec::new(), Vec::new());
    let (mut wa, mut wb) = (0.0, 0.0);
    for v in sorted {
        if wa <= wb {
            wa += weight[v];
            a.push(v);
        } else {
            wb += weight[v];
            b.push(v);
        }
    }
    a.sort_unstable();
    b.sort_unstable();
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pz_one_puts_everything_on_layer_zero() {
        let t = EtreeView::complete_binary(3, 4, 4);
        let m = build_3d_mapping(&t, &ProcessGrid3D::new(1, 1, 1).unwrap()).unwrap();
        assert!(m.placement.iter().all(|p| *p == NodePlacement { first: 0, count: 1 }));
        assert!(m.replicated_nodes().is_empty());
    }

    #[test]
    fn seven_node_walkthrough() {
        let t = EtreeView::complete_binary(3, 4, 4);
        let m = build_3d_mapping(&t, &ProcessGrid3D::new(1, 1, 4).unwrap()).unwrap();
        let layers: Vec<usize> = (3..7).map(|v| m.placement[v].first).collect();
        assert_eq!(layers, vec![0, 1, 2, 3]);
        assert_eq!(m.placement[1], NodePlacement { first: 0, count: 2 });
        assert_eq!(m.placement[2], NodePlacement { first: 2, count: 2 });
        assert_eq!(m.placement[0], NodePlacement { first: 0, count: 4 });
        assert_eq!(m.ancestor_level[0], Some(0));
        assert_eq!(m.ancestor_level[1], Some(1));
    }

    #[test]
    fn fifteen_nodes_halving() {
        let t = EtreeView::complete_binary(4, 4, 4);
        let m = build_3d_mapping(&t, &ProcessGrid3D::new(1, 1, 4).unwrap()).unwrap();
        assert_eq!(m.placement[0].count, 4);
        assert_eq!((m.placement[1].count, m.placement[2].count), (2, 2));
        assert!((3..15).all(|v| m.placement[v].count == 1));
        for layer in 0..4 {
            assert_eq!(m.layer_nodes(layer).len(), 3);
        }
    }

    #[test]
    fn too_shallow_is_config_error() {
        let t = EtreeView::complete_binary(2, 4, 4);
        assert!(matches!(build_3d_mapping(&t, &ProcessGrid3D::new(1, 1, 8).unwrap()), Err(Error::Config(_))));
    }
}
