//! Elimination tree, exact fill pattern and relaxed supernodes.

use std::ops::Range;

use super::{check_permutation, invert_permutation, SparseMatrix};
use crate::error::{Error, Result};

/// Default amalgamation allowance: explicit zeros may reach this fraction
/// of the merged front.
pub const DEFAULT_RELAX: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct EliminationStructure {
    pub n: usize,
    /// Final symmetric permutation, `perm[new] = old`. It is the input
    /// ordering followed by an etree postorder.
    pub perm: Vec<usize>,
    pub supernodes: Vec<Range<usize>>,
    pub parent: Vec<Option<usize>>,
    /// Sorted rows of L below each supernode (columns of U to its right).
    pub update_rows: Vec<Vec<usize>>,
    pub column_parent: Vec<Option<usize>>,
    /// Exact strictly-lower pattern of every column of L.
    pub column_patterns: Vec<Vec<usize>>,
    pub column_supernode: Vec<usize>,
}

impl EliminationStructure {
    pub fn n_supernodes(&self) -> usize {
        self.supernodes.len()
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.supernodes.len()];
        for (s, p) in self.parent.iter().enumerate() {
            if let Some(p) = *p {
                ch[p].push(s);
            }
        }
        ch
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.supernodes.len()).filter(|&s| self.parent[s].is_none()).collect()
    }

    /// `(|I^s|, |I^u|)` of supernode `s`.
    pub fn front_dims(&self, s: usize) -> (usize, usize) {
        (self.supernodes[s].len(), self.update_rows[s].len())
    }

    /// Entries of L and U (diagonal once) stored by the supernodal fronts.
    pub fn predicted_entries(&self) -> usize {
        (0..self.supernodes.len())
            .map(|s| {
                let (ns, nu) = self.front_dims(s);
                let f = ns + nu;
                f * f - nu * nu
            })
            .sum()
    }

    /// Entries of the supernodal L pattern, diagonal included. U mirrors
    /// it under the symmetric pattern.
    pub fn l_entries(&self) -> usize {
        (0..self.supernodes.len())
            .map(|s| {
                let (ns, nu) = self.front_dims(s);
                ns * (ns + nu) - ns * (ns - 1) / 2
            })
            .sum()
    }

    /// Entries of the exact L + U pattern.
    pub fn exact_entries(&self) -> usize {
        self.column_patterns.iter().map(|p| 2 * p.len() + 1).sum()
    }

    /// Supernodal row pattern of column `j` of L: the rest of its
    /// supernode followed by the supernode's update rows.
    pub fn supernodal_pattern(&self, j: usize) -> Vec<usize> {
        let s = self.column_supernode[j];
        let mut rows: Vec<usize> = (j + 1..self.supernodes[s].end).collect();
        rows.extend_from_slice(&self.update_rows[s]);
        rows
    }

    pub fn validate(&self) -> Result<()> {
        let mut next = 0;
        for (s, r) in self.supernodes.iter().enumerate() {
            if r.start != next || r.is_empty() {
                return Err(Error::Structure(format!("supernode {s} range {r:?} breaks the partition")));
            }
            next = r.end;
            if let Some(p) = self.parent[s] {
                if p <= s {
                    return Err(Error::Structure(format!("supernode {s} has parent {p}")));
                }
            }
        }
        if next != self.n {
            return Err(Error::Structure("supernodes do not cover every column".into()));
        }
        for s in 0..self.supernodes.len() {
            let mut anc = Vec::new();
            let mut p = self.parent[s];
            while let Some(q) = p {
                anc.extend(self.supernodes[q].clone());
                p = self.parent[q];
            }
            anc.sort_unstable();
            if self.update_rows[s].iter().any(|r| anc.binary_search(r).is_err()) {
                return Err(Error::Structure(format!("update rows of supernode {s} leave its ancestors")));
            }
        }
        Ok(())
    }
}

pub fn symbolic_factorize(a: &SparseMatrix, p_col: &[usize]) -> Result<EliminationStructure> {
    symbolic_factorize_with(a, p_col, DEFAULT_RELAX)
}

/// Symbolic analysis of the symmetrized pattern of `A` under `p_col`.
/// `relax` = 0 keeps fundamental supernodes.
pub fn symbolic_factorize_with(a: &SparseMatrix, p_col: &[usize], relax: f64) -> Result<EliminationStructure> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("symbolic analysis needs a square matrix, got {}x{}", a.n_rows(), a.n_cols())));
    }
    let n = a.n_rows();
    check_permutation(p_col, n)?;
    let adj = a.symmetric_adjacency();

    let first = elimination_tree(&adj, p_col);
    let post = postorder(&first);
    let perm: Vec<usize> = post.iter().map(|&k| p_col[k]).collect();
    let column_parent = elimination_tree(&adj, &perm);
    let column_patterns = column_patterns(&adj, &perm, &column_parent);

    let mut sn = fundamental_supernodes(&column_parent, &column_patterns);
    amalgamate(&mut sn, relax);

    let mut column_supernode = vec![0; n];
    for (s, node) in sn.iter().enumerate() {
        for j in node.range.clone() {
            column_supernode[j] = s;
        }
    }
    let parent = sn
        .iter()
        .map(|node| node.update.first().map(|&r| column_supernode[r]))
        .collect();
    let es = EliminationStructure {
        n,
        perm,
        supernodes: sn.iter().map(|s| s.range.clone()).collect(),
        parent,
        update_rows: sn.into_iter().map(|s| s.update).collect(),
        column_parent,
        column_patterns,
        column_supernode,
    };
    debug_assert!(es.validate().is_ok());
    Ok(es)
}

/// Liu's algorithm with path compression on the permuted graph.
fn elimination_tree(adj: &[Vec<usize>], perm: &[usize]) -> Vec<Option<usize>> {
    let n = perm.len();
    let pos = invert_permutation(perm);
    let mut parent = vec![None; n];
    let mut ancestor: Vec<Option<usize>> = vec![None; n];
    for j in 0..n {
        for &w in &adj[perm[j]] {
            let mut i = pos[w];
            if i >= j {
                continue;
            }
            while let Some(a) = ancestor[i] {
                if a == j {
                    break;
                }
                ancestor[i] = Some(j);
                i = a;
            }
            if ancestor[i].is_none() {
                ancestor[i] = Some(j);
                parent[i] = Some(j);
            }
        }
    }
    parent
}

/// Postorder visiting children in ascending order; `post[new] = old`.
fn postorder(parent: &[Option<usize>]) -> Vec<usize> {
    let n = parent.len();
    let mut children = vec![Vec::new(); n];
    let mut roots = Vec::new();
    for (v, p) in parent.iter().enumerate() {
        match p {
            Some(p) => children[*p].push(v),
            None => roots.push(v),
        }
    }
    let mut post = Vec::with_capacity(n);
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for r in roots {
        stack.push((r, 0));
        while let Some(&mut (v, ref mut k)) = stack.last_mut() {
            if *k < children[v].len() {
                let c = children[v][*k];
                *k += 1;
                stack.push((c, 0));
            } else {
                post.push(v);
                stack.pop();
            }
        }
    }
    post
}

fn column_patterns(adj: &[Vec<usize>], perm: &[usize], parent: &[Option<usize>]) -> Vec<Vec<usize>> {
    let n = perm.len();
    let pos = invert_permutation(perm);
    let mut children = vec![Vec::new(); n];
    for (v, p) in parent.iter().enumerate() {
        if let Some(p) = p {
            children[*p].push(v);
        }
    }
    let mut mark = vec![usize::MAX; n];
    let mut pats: Vec<Vec<usize>> = vec![Vec::new(); n];
    for j in 0..n {
        let mut rows = Vec::new();
        mark[j] = j;
        for &w in &adj[perm[j]] {
            let i = pos[w];
            if i > j && mark[i] != j {
                mark[i] = j;
                rows.push(i);
            }
        }
        for &c in &children[j] {
            for &i in &pats[c] {
                if mark[i] != j {
                    mark[i] = j;
                    rows.push(i);
                }
            }
        }
        rows.sort_unstable();
        pats[j] = rows;
    }
    pats
}

struct Supernode {
    range: Range<usize>,
    update: Vec<usize>,
    exact: usize,
    children: Vec<usize>,
    parent: Option<usize>,
    alive: bool,
}

fn fundamental_supernodes(parent: &[Option<usize>], pats: &[Vec<usize>]) -> Vec<Supernode> {
    let n = parent.len();
    let mut n_children = vec![0usize; n];
    for p in parent.iter().flatten() {
        n_children[*p] += 1;
    }
    let mut out: Vec<Supernode> = Vec::new();
    let mut start = 0;
    for j in 0..n {
        let joins_next = j + 1 < n
            && parent[j] == Some(j + 1)
            && n_children[j + 1] == 1
            && pats[j].len() == pats[j + 1].len() + 1;
        if !joins_next {
            let exact = (start..=j).map(|c| 2 * pats[c].len() + 1).sum();
            out.push(Supernode {
                range: start..j + 1,
                update: pats[j].clone(),
                exact,
                children: Vec::new(),
                parent: None,
                alive: true,
            });
            start = j + 1;
        }
    }
    let mut col_sn = vec![0; n];
    for (s, node) in out.iter().enumerate() {
        for j in node.range.clone() {
            col_sn[j] = s;
        }
    }
    for s in 0..out.len() {
        if let Some(&r) = out[s].update.first() {
            let p = col_sn[r];
            out[s].parent = Some(p);
            out[p].children.push(s);
        }
    }
    out
}

fn amalgamate(sn: &mut Vec<Supernode>, relax: f64) {
    if relax <= 0.0 {
        return;
    }
    for p in 0..sn.len() {
        loop {
            let start = sn[p].range.start;
            let Some(&c) = sn[p].children.iter().find(|&&c| sn[c].range.end == start) else {
                break;
            };
            let end = sn[p].range.end;
            let mut update: Vec<usize> = sn[c].update.iter().copied().filter(|&r| r >= end).collect();
            update.extend_from_slice(&sn[p].update);
            update.sort_unstable();
            update.dedup();
            let f = end - sn[c].range.start + update.len();
            let stored = f * f - update.len() * update.len();
            let extra = stored - (sn[c].exact + sn[p].exact);
            if extra as f64 > relax * (f * f) as f64 {
                break;
            }
            let child = std::mem::take(&mut sn[c].children);
            for &g in &child {
                sn[g].parent = Some(p);
            }
            sn[c].alive = false;
            let (exact, c_start) = (sn[c].exact, sn[c].range.start);
            let node = &mut sn[p];
            node.range.start = c_start;
            node.update = update;
            node.exact += exact;
            node.children.retain(|&x| x != c);
            node.children.extend(child);
        }
    }
    sn.retain(|s| s.alive);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{model_problem, nested_dissection, ModelKind, DEFAULT_LEAF_CUTOFF};
    use proptest::prelude::*;

    /// Dense boolean elimination: every pivot couples all its remaining
    /// row and column neighbours.
    fn brute_force_pattern(a: &SparseMatrix, perm: &[usize]) -> Vec<Vec<usize>> {
        let n = a.n_rows();
        let pos = invert_permutation(perm);
        let mut g = vec![vec![false; n]; n];
        for (i, j, _) in a.triplets() {
            g[pos[i]][pos[j]] = true;
            g[pos[j]][pos[i]] = true;
        }
        for k in 0..n {
            for i in k + 1..n {
                if !g[i][k] {
                    continue;
                }
                for j in k + 1..n {
                    if g[k][j] {
                        g[i][j] = true;
                    }
                }
            }
        }
        (0..n).map(|j| (j + 1..n).filter(|&i| g[i][j]).collect()).collect()
    }

    #[test]
    fn diagonal_has_singletons() {
        let es = symbolic_factorize(&SparseMatrix::identity(5), &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(es.n_supernodes(), 5);
        assert!(es.parent.iter().all(Option::is_none));
        assert_eq!(es.exact_entries(), 5);
        assert_eq!(es.predicted_entries(), 5);
    }

    #[test]
    fn dense_is_one_supernode() {
        let t: Vec<_> = (0..4).flat_map(|i| (0..4).map(move |j| (i, j, 1.0 + (i + j) as f64))).collect();
        let a = SparseMatrix::from_triplets(4, 4, &t).unwrap();
        let es = symbolic_factorize_with(&a, &[0, 1, 2, 3], 0.0).unwrap();
        assert_eq!(es.supernodes, vec![0..4]);
        assert!(es.update_rows[0].is_empty());
    }

    #[test]
    fn grid_matches_brute_force() {
        let (a, c) = model_problem(ModelKind::Poisson2d, 7).unwrap();
        let (p, _) = nested_dissection(&a, Some(&c), 4).unwrap();
        let es = symbolic_factorize(&a, &p).unwrap();
        es.validate().unwrap();
        assert_eq!(es.column_patterns, brute_force_pattern(&a, &es.perm));
        for j in 0..es.n {
            let sup = es.supernodal_pattern(j);
            assert!(es.column_patterns[j].iter().all(|r| sup.binary_search(r).is_ok()));
        }
        assert!(es.predicted_entries() >= es.exact_entries());
    }

    #[test]
    fn fundamental_supernodes_are_exact() {
        let (a, c) = model_problem(ModelKind::Poisson2d, 9).unwrap();
        let (p, _) = nested_dissection(&a, Some(&c), 8).unwrap();
        let es = symbolic_factorize_with(&a, &p, 0.0).unwrap();
        assert_eq!(es.predicted_entries(), es.exact_entries());
    }

    #[test]
    fn nested_dissection_fill_is_n_log_n() {
        let (a, c) = model_problem(ModelKind::Poisson2d, 31).unwrap();
        let (p, _) = nested_dissection(&a, Some(&c), DEFAULT_LEAF_CUTOFF).unwrap();
        let es = symbolic_factorize(&a, &p).unwrap();
        let n = es.n as f64;
        let bound = 4.0 * n * n.log2();
        assert!((es.l_entries() as f64) <= bound, "{} > {bound}", es.l_entries());
        assert_eq!(2 * es.l_entries() - es.n, es.predicted_entries());
    }

    fn arb_pattern() -> impl Strategy<Value = SparseMatrix> {
        (2usize..60).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..3 * n).prop_map(move |e| {
                let mut t: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
                t.extend(e.into_iter().filter(|(i, j)| i != j).map(|(i, j)| (i, j, 1.0)));
                SparseMatrix::from_triplets(n, n, &t).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn random_patterns_match_brute_force(a in arb_pattern(), bfs in any::<bool>()) {
            let n = a.n_rows();
            let p: Vec<usize> = if bfs { nested_dissection(&a, None, 4).unwrap().0 } else { (0..n).rev().collect() };
            let es = symbolic_factorize(&a, &p).unwrap();
            prop_assert!(es.validate().is_ok());
            prop_assert_eq!(&es.column_patterns, &brute_force_pattern(&a, &es.perm));
            for (i, j, _) in a.permute(&es.perm, &es.perm).unwrap().triplets() {
                if i > j {
                    prop_assert!(es.column_patterns[j].binary_search(&i).is_ok());
                }
            }
        }
    }
}
