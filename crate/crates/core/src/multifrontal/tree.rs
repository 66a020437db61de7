use crate::error::{Error, Result};
use crate::sparse::EliminationStructure;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssemblyNode {
    /// Fully-summed indices `I^s` (contiguous in the permuted order).
    pub fully_summed: Vec<usize>,
    /// Update indices `I^u`, ascending.
    pub update: Vec<usize>,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
}

impl AssemblyNode {
    pub fn front_size(&self) -> usize {
        self.fully_summed.len() + self.update.len()
    }

    /// `I^s ∪ I^u`, ascending.
    pub fn indices(&self) -> Vec<usize> {
        let mut v = self.fully_summed.clone();
        v.extend_from_slice(&self.update);
        v
    }
}

/// Supernodal elimination tree annotated with front index sets. Nodes are
/// numbered so every child precedes its parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssemblyTree {
    pub n: usize,
    pub nodes: Vec<AssemblyNode>,
}

impl AssemblyTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].parent.is_none()).collect()
    }

    pub fn peak_front(&self) -> usize {
        self.nodes.iter().map(AssemblyNode::front_size).max().unwrap_or(0)
    }

    /// Checks the partition, ancestor and child-containment invariants.
    pub fn validate(&self) -> Result<()> {
        let mut owner = vec![usize::MAX; self.n];
        for (t, node) in self.nodes.iter().enumerate() {
            for &i in &node.fully_summed {
                if i >= self.n || owner[i] != usize::MAX {
                    return Err(Error::Structure(format!("index {i} of node {t} breaks the I^s partition")));
                }
                owner[i] = t;
            }
            if let Some(p) = node.parent {
                if p <= t {
                    return Err(Error::Structure(format!("node {t} has parent {p}")));
                }
            }
        }
        if owner.contains(&usize::MAX) {
            return Err(Error::Structure("I^s sets do not cover every index".into()));
        }
        for (t, node) in self.nodes.iter().enumerate() {
            if node.update.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Structure(format!("I^u of node {t} is not sorted")));
            }
            for &i in &node.update {
                let mut a = node.parent;
                let mut found = false;
                while let Some(p) = a {
                    if owner[i] == p {
                        found = true;
                        break;
                    }
                    a = self.nodes[p].parent;
                }
                if !found {
                    return Err(Error::Structure(format!("update index {i} of node {t} is not owned by an ancestor")));
                }
            }
            for &c in &node.children {
                let idx = node.indices();
                if self.nodes[c].update.iter().any(|i| idx.binary_search(i).is_err()) {
                    return Err(Error::Structure(format!("child {c} update escapes front {t}")));
                }
            }
        }
        Ok(())
    }
}

/// One node per supernode, `I^s` = its columns, `I^u` = rows below it.
pub fn build_assembly_tree(es: &EliminationStructure) -> AssemblyTree {
    let children = es.children();
    let nodes = (0..es.n_supernodes())
        .map(|s| AssemblyNode {
            fully_summed: es.supernodes[s].clone().collect(),
            update: es.update_rows[s].clone(),
            children: children[s].clone(),
            parent: es.parent[s],
        })
        .collect();
    AssemblyTree { n: es.n, nodes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{model_problem, nested_dissection, symbolic_factorize, ModelKind, SparseMatrix};

    #[test]
    fn diagonal_and_dense() {
        let es = symbolic_factorize(&SparseMatrix::identity(4), &[0, 1, 2, 3]).unwrap();
        let t = build_assembly_tree(&es);
        assert_eq!(t.len(), 4);
        assert!(t.nodes.iter().all(|n| n.update.is_empty()));
        let d = SparseMatrix::from_dense(&crate::dense::DenseMatrix::from_fn(3, 3, |i, j| 1.0 + (i * 3 + j) as f64));
        let t = build_assembly_tree(&symbolic_factorize(&d, &[0, 1, 2]).unwrap());
        assert_eq!(t.len(), 1);
        assert!(t.nodes[0].update.is_empty());
    }

    #[test]
    fn grid_update_sets_belong_to_ancestors() {
        let (a, c) = model_problem(ModelKind::Poisson2d, 7).unwrap();
        let (p, _) = nested_dissection(&a, Some(&c), 4).unwrap();
        let t = build_assembly_tree(&symbolic_factorize(&a, &p).unwrap());
        t.validate().unwrap();
        for (i, node) in t.nodes.iter().enumerate() {
            let mut anc = Vec::new();
            let mut q = node.parent;
            while let Some(x) = q {
                anc.extend_from_slice(&t.nodes[x].fully_summed);
                q = t.nodes[x].parent;
            }
            assert!(node.update.iter().all(|u| anc.contains(u)), "node {i}");
        }
    }
}
