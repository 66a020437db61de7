use std::fmt::Write as _;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    /// Solution entries of `from` read by `to`.
    pub scalars: usize,
}

/// One vertex per supernode diagonal solve. Task `t` pulls the solution
/// of every predecessor and applies the coupling block itself, so the
/// block's flops are charged to `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskDag {
    pub supernodes: Vec<Range<usize>>,
    pub flops: Vec<f64>,
    pub edges: Vec<Edge>,
    pub levels: Vec<usize>,
}

impl TaskDag {
    /// Builds a DAG from explicit vertices and edges, computing levels.
    pub fn from_parts(supernodes: Vec<Range<usize>>, flops: Vec<f64>, edges: Vec<Edge>) -> Result<Self> {
        let n = flops.len();
        if supernodes.len() != n {
            return Err(Error::Dimension(format!("{} supernodes for {n} vertices", supernodes.len())));
        }
        if let Some(e) = edges.iter().find(|e| e.from >= n || e.to >= n) {
            return Err(Error::Structure(format!("edge {} -> {} out of range", e.from, e.to)));
        }
        let levels = compute_levels(n, &edges)?;
        Ok(Self {
            supernodes,
            flops,
            edges,
            levels,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.flops.len()
    }

    pub fn n_levels(&self) -> usize {
        self.levels.iter().map(|&l| l + 1).max().unwrap_or(0)
    }

    /// Incoming edge indices per vertex, in edge order.
    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut p = vec![Vec::new(); self.n_vertices()];
        for (k, e) in self.edges.iter().enumerate() {
            p[e.to].push(k);
        }
        p
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph tasks {\n");
        for v in 0..self.n_vertices() {
            let _ = writeln!(s, "  t{v} [label=\"{v} L{} f{}\"];", self.levels[v], self.flops[v]);
        }
        for e in &self.edges {
            let _ = writeln!(s, "  t{} -> t{} [label=\"{}\"];", e.from, e.to, e.scalars);
        }
        s.push_str("}\n");
        s
    }

    /// `level,count` rows.
    pub fn level_histogram_csv(&self) -> String {
        let mut counts = vec![0usize; self.n_levels()];
        for &l in &self.levels {
            counts[l] += 1;
        }
        let mut s = String::from("level,count\n");
        for (l, c) in counts.iter().enumerate() {
            let _ = writeln!(s, "{l},{c}");
        }
        s
    }
}

fn compute_levels(n: usize, edges: &[Edge]) -> Result<Vec<usize>> {
    let mut indeg = vec![0usize; n];
    let mut out = vec![Vec::new(); n];
    for e in edges {
        indeg[e.to] += 1;
        out[e.from].push(e.to);
    }
    let mut level = vec![0usize; n];
    let mut queue: std::collections::VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = queue.pop_front() {
        seen += 1;
        for &w in &out[v] {
            level[w] = level[w].max(level[v] + 1);
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    if seen < n {
        let v = (0..n).find(|&v| indeg[v] > 0).unwrap_or(0);
        return Err(Error::Cycle(v));
    }
    Ok(level)
}

/// Vertices grouped by level, ascending vertex index within a level.
pub fn level_sets(dag: &TaskDag) -> Vec<Vec<usize>> {
    let mut sets = vec![Vec::new(); dag.n_levels()];
    for (v, &l) in dag.levels.iter().enumerate() {
        sets[l].push(v);
    }
    sets
}

/// Task DAG of a lower-triangular `l` partitioned into contiguous
/// `supernodes`. Entries above the diagonal are rejected.
pub fn build_task_dag(l: &SparseMatrix, supernodes: &[Range<usize>]) -> Result<TaskDag> {
    let n = l.n_rows();
    if !l.is_square() {
        return Err(Error::Dimension(format!("triangular factor is {}x{}", l.n_rows(), l.n_cols())));
    }
    let mut owner = vec![usize::MAX; n];
    let mut next = 0;
    for (s, r) in supernodes.iter().enumerate() {
        if r.start != next {
            return Err(Error::Structure(format!("supernode {s} does not start at column {next}")));
        }
        owner[r.clone()].fill(s);
        next = r.end;
    }
    if next != n {
        return Err(Error::Structure(format!("supernodes cover {next} of {n} columns")));
    }
    let m = supernodes.len();
    let mut flops = vec![0.0; m];
    // (to, from) -> distinct columns of `from` used by `to`.
    let mut coupling: std::collections::BTreeMap<(usize, usize), usize> = Default::default();
    for j in 0..n {
        let (rows, vals) = l.col(j);
        let mut has_diag = false;
        let mut last_target = usize::MAX;
        for (&i, &v) in rows.iter().zip(vals) {
            if i < j {
                return Err(Error::Structure(format!("entry ({i}, {j}) above the diagonal")));
            }
            if i == j {
                has_diag = v != 0.0;
                flops[owner[j]] += 1.0;
                continue;
            }
            let (s, t) = (owner[j], owner[i]);
            flops[t] += 2.0;
            if s != t && t != last_target {
                *coupling.entry((t, s)).or_insert(0) += 1;
                last_target = t;
            }
        }
        if !has_diag {
            return Err(Error::SingularPivot { column: j });
        }
    }
    let mut edges: Vec<Edge> = coupling
        .into_iter()
        .map(|((to, from), scalars)| Edge { from, to, scalars })
        .collect();
    edges.sort_by_key(|e| (e.from, e.to));
    TaskDag::from_parts(supernodes.to_vec(), flops, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multifrontal::{multifrontal_factorize, Policy};
    use crate::sparse::{model_problem, ModelKind};
    use proptest::prelude::*;

    fn singletons(n: usize) -> Vec<Range<usize>> {
        (0..n).map(|i| i..i + 1).collect()
    }

    #[test]
    fn diagonal_has_no_edges() {
        let dag = build_task_dag(&SparseMatrix::identity(4), &singletons(4)).unwrap();
        assert!(dag.edges.is_empty());
        assert_eq!(dag.levels, vec![0; 4]);
        assert_eq!(level_sets(&dag).len(), 1);
    }

    #[test]
    fn bidiagonal_chain() {
        let mut t: Vec<(usize, usize, f64)> = (0..5).map(|i| (i, i, 2.0)).collect();
        t.extend((1..5).map(|i| (i, i - 1, 1.0)));
        let l = SparseMatrix::from_triplets(5, 5, &t).unwrap();
        let dag = build_task_dag(&l, &singletons(5)).unwrap();
        assert_eq!(dag.levels, vec![0, 1, 2, 3, 4]);
        assert_eq!(level_sets(&dag), (0..5).map(|i| vec![i]).collect::<Vec<_>>());
    }

    #[test]
    fn zero_diagonal_and_upper_entries_fail() {
        let l = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 0, 1.0)]).unwrap();
        assert!(matches!(build_task_dag(&l, &singletons(2)), Err(Error::SingularPivot { column: 1 })));
        let u = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0)]).unwrap();
        assert!(matches!(build_task_dag(&u, &singletons(2)), Err(Error::Structure(_))));
    }

    #[test]
    fn cycle_is_reported() {
        let e = |from, to| Edge { from, to, scalars: 1 };
        let r = TaskDag::from_parts(singletons(3), vec![1.0; 3], vec![e(0, 1), e(1, 2), e(2, 1)]);
        assert!(matches!(r, Err(Error::Cycle(_))));
    }

    // Longest path by exhaustive DFS over the coupling pattern of `l`.
    fn longest_path_oracle(l: &SparseMatrix, sn: &[Range<usize>]) -> Vec<usize> {
        let owner = |i: usize| sn.iter().position(|r| r.contains(&i)).unwrap();
        let m = sn.len();
        let mut succ = vec![std::collections::BTreeSet::new(); m];
        for (i, j, _) in l.triplets() {
            if owner(i) != owner(j) {
                succ[owner(j)].insert(owner(i));
            }
        }
        fn walk(v: usize, depth: usize, succ: &[std::collections::BTreeSet<usize>], best: &mut [usize]) {
            if depth > 0 && depth <= best[v] {
                return;
            }
            best[v] = best[v].max(depth);
            for &w in &succ[v] {
                walk(w, depth + 1, succ, best);
            }
        }
        let mut best = vec![0; m];
        for v in 0..m {
            walk(v, 0, &succ, &mut best);
        }
        best
    }

    #[test]
    fn poisson_factor_levels_match_longest_path() {
        let (a, c) = model_problem(ModelKind::Poisson2d, 7).unwrap();
        let f = multifrontal_factorize(&a, Some(&c), &Policy::exact()).unwrap();
        let (l, _) = f.lower_factor().unwrap();
        let sn: Vec<Range<usize>> = f.tree.nodes.iter().map(|n| n.fully_summed[0]..n.fully_summed[0] + n.fully_summed.len()).collect();
        let dag = build_task_dag(&l, &sn).unwrap();
        assert_eq!(dag.levels, longest_path_oracle(&l, &sn));
        let scalar = build_task_dag(&l, &singletons(l.n_rows())).unwrap();
        assert_eq!(scalar.levels, longest_path_oracle(&l, &singletons(l.n_rows())));
    }

    #[test]
    fn exports() {
        let l = SparseMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (1, 0, 1.0), (1, 1, 2.0)]).unwrap();
        let dag = build_task_dag(&l, &singletons(2)).unwrap();
        assert_eq!(dag.level_histogram_csv(), "level,count\n0,1\n1,1\n");
        assert!(dag.to_dot().contains("t0 -> t1"));
    }

    fn random_lower(n: usize, density: f64, seed: u64) -> SparseMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for j in 0..n {
            t.push((j, j, 1.0 + rng.gen::<f64>()));
            for i in j + 1..n {
                if rng.gen::<f64>() < density {
                    t.push((i, j, rng.gen::<f64>() - 0.5));
                }
            }
        }
        SparseMatrix::from_triplets(n, n, &t).unwrap()
    }

    proptest! {
        #[test]
        fn edges_cross_levels_upward(seed in any::<u64>()) {
            let l = random_lower(50, 0.3, seed);
            let dag = build_task_dag(&l, &singletons(50)).unwrap();
            for e in &dag.edges {
                prop_assert!(dag.levels[e.from] < dag.levels[e.to]);
            }
            prop_assert_eq!(&dag.levels, &longest_path_oracle(&l, &singletons(50)));
            let sets = level_sets(&dag);
            prop_assert_eq!(sets.iter().map(Vec::len).sum::<usize>(), 50);
        }
    }
}
