//! HODLR matrices: weak admissibility, independent bases, recursive
//! block-LU factorization.

use std::fmt::Write as _;
use std::ops::Range;

use rand::Rng;

use super::ClusterTree;
use crate::dense::{aca, randomized_range, truncated_svd, DenseMatrix, LowRankFactor, LuFactors, SketchOptions};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
enum Node {
    Leaf(DenseMatrix),
    Split {
        n1: usize,
        level: usize,
        ids: (usize, usize),
        a11: Box<Node>,
        a22: Box<Node>,
        a12: LowRankFactor,
        a21: LowRankFactor,
    },
}

/// Hierarchically off-diagonal low-rank matrix stored in cluster order.
#[derive(Debug, Clone)]
pub struct HodlrMatrix {
    root: Node,
    perm: Vec<usize>,
    tol: f64,
}

/// One row of the rank diagnostic table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockRank {
    pub level: usize,
    pub block_row: usize,
    pub block_col: usize,
    pub rank: usize,
    pub rows: usize,
    pub cols: usize,
}

fn split_rows(x: &DenseMatrix, n1: usize) -> (DenseMatrix, DenseMatrix) {
    let c = x.n_cols();
    (x.submatrix(0..n1, 0..c), x.submatrix(n1..x.n_rows(), 0..c))
}

fn permute_in(perm: &[usize], x: &DenseMatrix) -> DenseMatrix {
    x.select_rows(perm)
}

fn permute_out(perm: &[usize], y: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(y.n_rows(), y.n_cols());
    for j in 0..y.n_cols() {
        for (pos, &orig) in perm.iter().enumerate() {
            out[(orig, j)] = y[(pos, j)];
        }
    }
    out
}

impl HodlrMatrix {
    /// Entry-evaluation construction: ACA on every sibling off-diagonal
    /// block followed by SVD recompression. `entry` uses original indices.
    pub fn from_entries(tree: &ClusterTree, tol: f64, entry: impl Fn(usize, usize) -> f64) -> Self {
        let perm = tree.perm.clone();
        let e = |i: usize, j: usize| entry(perm[i], perm[j]);
        let compress = |rs: &Range<usize>, rt: &Range<usize>| {
            let f = aca(|i, j| e(rs.start + i, rt.start + j), rs.len(), rt.len(), tol);
            let converged = f.converged;
            let mut f = f.recompress(tol);
            f.converged = converged;
            f
        };
        let root = if tree.nodes.is_empty() {
            Node::Leaf(DenseMatrix::zeros(0, 0))
        } else {
            build_entries(tree, 0, &e, &compress)
        };
        Self { root, perm, tol }
    }

    /// Construction from an explicit matrix (original ordering) with a
    /// truncated SVD of every off-diagonal block.
    pub fn from_dense(tree: &ClusterTree, tol: f64, m: &DenseMatrix) -> Self {
        let perm = tree.perm.clone();
        let a = m.select(&perm, &perm);
        let e = |i: usize, j: usize| a[(i, j)];
        let compress = |rs: &Range<usize>, rt: &Range<usize>| truncated_svd(&a.submatrix(rs.clone(), rt.clone()), tol);
        let root = if tree.nodes.is_empty() {
            Node::Leaf(DenseMatrix::zeros(0, 0))
        } else {
            build_entries(tree, 0, &e, &compress)
        };
        Self { root, perm, tol }
    }

    /// Matrix-free construction from `X ↦ A X` and `X ↦ Aᵀ X` (original
    /// ordering). Each block is probed with vectors supported on its
    /// column cluster.
    pub fn from_matvec<R: Rng + ?Sized>(
        tree: &ClusterTree,
        tol: f64,
        apply: impl Fn(&DenseMatrix) -> DenseMatrix,
        apply_t: impl Fn(&DenseMatrix) -> DenseMatrix,
        rng: &mut R,
    ) -> Self {
        let n = tree.n();
        let perm = tree.perm.clone();
        let embed = |range: &std::ops::Range<usize>, x: &DenseMatrix| {
            let mut full = DenseMatrix::zeros(n, x.n_cols());
            for j in 0..x.n_cols() {
                for (k, pos) in range.clone().enumerate() {
                    full[(perm[pos], j)] = x[(k, j)];
                }
            }
            full
        };
        let restrict = |range: &std::ops::Range<usize>, y: &DenseMatrix| {
            let rows: Vec<usize> = range.clone().map(|p| perm[p]).collect();
            y.select_rows(&rows)
        };
        let mut ctx = MatvecCtx {
            tree,
            tol,
            block: &|s: usize, t: usize, x: &DenseMatrix, transpose: bool| {
                let (rs, rt) = (&tree.nodes[s].range, &tree.nodes[t].range);
                if transpose {
                    restrict(rt, &apply_t(&embed(rs, x)))
                } else {
                    restrict(rs, &apply(&embed(rt, x)))
                }
            },
        };
        let root = if tree.nodes.is_empty() { Node::Leaf(DenseMatrix::zeros(0, 0)) } else { ctx.build(0, rng) };
        Self { root, perm, tol }
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Stored scalars: dense leaves plus `r·(rows+cols)` per block.
    pub fn storage(&self) -> usize {
        fn walk(n: &Node) -> usize {
            match n {
                Node::Leaf(d) => d.n_rows() * d.n_cols(),
                Node::Split { a11, a22, a12, a21, .. } => walk(a11) + walk(a22) + a12.storage() + a21.storage(),
            }
        }
        walk(&self.root)
    }

    pub fn max_rank(&self) -> usize {
        self.ranks().iter().map(|b| b.rank).max().unwrap_or(0)
    }

    /// Off-diagonal blocks whose construction did not meet the tolerance.
    pub fn unconverged_blocks(&self) -> usize {
        fn walk(n: &Node) -> usize {
            match n {
                Node::Leaf(_) => 0,
                Node::Split { a11, a22, a12, a21, .. } => {
                    walk(a11) + walk(a22) + usize::from(!a12.converged) + usize::from(!a21.converged)
                }
            }
        }
        walk(&self.root)
    }

    pub fn ranks(&self) -> Vec<BlockRank> {
        fn walk(n: &Node, out: &mut Vec<BlockRank>) {
            if let Node::Split { level, ids, a11, a22, a12, a21, .. } = n {
                for (lr, (r, c)) in [(a12, *ids), (a21, (ids.1, ids.0))] {
                    out.push(BlockRank {
                        level: *level,
                        block_row: r,
                        block_col: c,
                        rank: lr.rank(),
                        rows: lr.n_rows(),
                        cols: lr.n_cols(),
                    });
                }
                walk(a11, out);
                walk(a22, out);
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out.sort_by_key(|b| (b.level, b.block_row, b.block_col));
        out
    }

    /// Rank table as CSV: `level,block_row,block_col,rank,rows,cols`.
    pub fn rank_csv(&self) -> String {
        let mut s = String::from("level,block_row,block_col,rank,rows,cols\n");
        for b in self.ranks() {
            let _ = writeln!(s, "{},{},{},{},{},{}", b.level, b.block_row, b.block_col, b.rank, b.rows, b.cols);
        }
        s
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.matmul(&DenseMatrix::from_col_major(x.len(), 1, x.to_vec())).into_vec()
    }

    pub fn matmul(&self, x: &DenseMatrix) -> DenseMatrix {
        assert_eq!(x.n_rows(), self.n(), "HODLR matvec dimension mismatch");
        permute_out(&self.perm, &apply(&self.root, &permute_in(&self.perm, x)))
    }

    /// Dense matrix in original ordering.
    pub fn to_dense(&self) -> DenseMatrix {
        let inv = crate::sparse::invert_permutation(&self.perm);
        densify(&self.root).select(&inv, &inv)
    }

    /// Recursive block LU. Leaf pivots are local to each leaf.
    pub fn factor(&self) -> Result<HodlrFactor> {
        let mut leaf = 0;
        let root = factor(self.root.clone(), self.tol, &mut leaf)?;
        Ok(HodlrFactor {
            root,
            perm: self.perm.clone(),
        })
    }
}

fn build_entries(
    tree: &ClusterTree,
    id: usize,
    e: &dyn Fn(usize, usize) -> f64,
    compress: &dyn Fn(&Range<usize>, &Range<usize>) -> LowRankFactor,
) -> Node {
    let node = &tree.nodes[id];
    if node.is_leaf() {
        let r = node.range.clone();
        return Node::Leaf(DenseMatrix::from_fn(r.len(), r.len(), |i, j| e(r.start + i, r.start + j)));
    }
    let (c1, c2) = (node.children[0], node.children[1]);
    let (r1, r2) = (tree.nodes[c1].range.clone(), tree.nodes[c2].range.clone());
    Node::Split {
        n1: r1.len(),
        level: node.level,
        ids: (c1, c2),
        a12: compress(&r1, &r2),
        a21: compress(&r2, &r1),
        a11: Box::new(build_entries(tree, c1, e, compress)),
        a22: Box::new(build_entries(tree, c2, e, compress)),
    }
}

type BlockApply<'a> = dyn Fn(usize, usize, &DenseMatrix, bool) -> DenseMatrix + 'a;

struct MatvecCtx<'a> {
    tree: &'a ClusterTree,
    tol: f64,
    block: &'a BlockApply<'a>,
}

impl MatvecCtx<'_> {
    fn build<R: Rng + ?Sized>(&mut self, id: usize, rng: &mut R) -> Node {
        let node = &self.tree.nodes[id];
        if node.is_leaf() {
            let len = node.len();
            return Node::Leaf((self.block)(id, id, &DenseMatrix::identity(len), false));
        }
        let (c1, c2) = (node.children[0], node.children[1]);
        let level = node.level;
        let (m1, m2) = (self.tree.nodes[c1].len(), self.tree.nodes[c2].len());
        let opts = SketchOptions::with_guess(self.tol, 0);
        let block = self.block;
        let a12 = randomized_range(|x| block(c1, c2, x, false), |x| block(c1, c2, x, true), m1, m2, &opts, rng);
        let a21 = randomized_range(|x| block(c2, c1, x, false), |x| block(c2, c1, x, true), m2, m1, &opts, rng);
        let a11 = Box::new(self.build(c1, rng));
        let a22 = Box::new(self.build(c2, rng));
        Node::Split {
            n1: m1,
            level,
            ids: (c1, c2),
            a11,
            a22,
            a12,
            a21,
        }
    }
}

fn apply(node: &Node, x: &DenseMatrix) -> DenseMatrix {
    match node {
        Node::Leaf(d) => d.matmul(x),
        Node::Split { n1, a11, a22, a12, a21, .. } => {
            let (x1, x2) = split_rows(x, *n1);
            let mut y1 = apply(a11, &x1);
            y1.axpy(1.0, &a12.matmul(&x2));
            let mut y2 = apply(a22, &x2);
            y2.axpy(1.0, &a21.matmul(&x1));
            y1.vcat(&y2)
        }
    }
}

fn densify(node: &Node) -> DenseMatrix {
    match node {
        Node::Leaf(d) => d.clone(),
        Node::Split { n1, a11, a22, a12, a21, .. } => {
            let d1 = densify(a11);
            let d2 = densify(a22);
            let n = n1 + d2.n_rows();
            let mut out = DenseMatrix::zeros(n, n);
            out.set_block(0, 0, &d1);
            out.set_block(*n1, *n1, &d2);
            out.set_block(0, *n1, &a12.to_dense());
            out.set_block(*n1, 0, &a21.to_dense());
            out
        }
    }
}

/// `node += X Yᵀ`, folding the update into every level.
fn add_low_rank(node: &mut Node, x: &DenseMatrix, y: &DenseMatrix, tol: f64) {
    if x.n_cols() == 0 {
        return;
    }
    match node {
        Node::Leaf(d) => d.axpy(1.0, &x.matmul_t(y)),
        Node::Split { n1, a11, a22, a12, a21, .. } => {
            let (x1, x2) = split_rows(x, *n1);
            let (y1, y2) = split_rows(y, *n1);
            add_low_rank(a11, &x1, &y1, tol);
            add_low_rank(a22, &x2, &y2, tol);
            *a12 = a12.concat(1.0, &LowRankFactor::new(x1, y2, tol)).recompress(tol);
            *a21 = a21.concat(1.0, &LowRankFactor::new(x2, y1, tol)).recompress(tol);
        }
    }
}

#[derive(Debug, Clone)]
enum FactorNode {
    Leaf(LuFactors),
    Split {
        n1: usize,
        f11: Box<FactorNode>,
        s22: Box<FactorNode>,
        u12: DenseMatrix,
        v12: DenseMatrix,
        u21: DenseMatrix,
        v21: DenseMatrix,
        /// `A11⁻¹ U12`.
        w12: DenseMatrix,
        /// `A11⁻ᵀ V21`.
        wt21: DenseMatrix,
    },
}

fn factor(node: Node, tol: f64, leaf: &mut usize) -> Result<FactorNode> {
    match node {
        Node::Leaf(d) => {
            let id = *leaf;
            *leaf += 1;
            LuFactors::factor(d).map(FactorNode::Leaf).map_err(|e| match e {
                Error::SingularPivot { column } => Error::SingularLeaf { leaf: id, column },
                other => other,
            })
        }
        Node::Split { n1, a11, mut a22, a12, a21, .. } => {
            let f11 = factor(*a11, tol, leaf)?;
            let w12 = solve(&f11, &a12.u);
            let wt21 = solve_t(&f11, &a21.v);
            if a12.rank() > 0 && a21.rank() > 0 {
                let c = a21.v.t_matmul(&w12);
                let x = a21.u.matmul(&c).scaled(-1.0);
                add_low_rank(&mut a22, &x, &a12.v, tol);
            }
            let s22 = factor(*a22, tol, leaf)?;
            Ok(FactorNode::Split {
                n1,
                f11: Box::new(f11),
                s22: Box::new(s22),
                u12: a12.u,
                v12: a12.v,
                u21: a21.u,
                v21: a21.v,
                w12,
                wt21,
            })
        }
    }
}

fn low_rank_apply(u: &DenseMatrix, v: &DenseMatrix, x: &DenseMatrix) -> Option<DenseMatrix> {
    (u.n_cols() > 0).then(|| u.matmul(&v.t_matmul(x)))
}

fn solve(f: &FactorNode, b: &DenseMatrix) -> DenseMatrix {
    match f {
        FactorNode::Leaf(lu) => lu.solve(b),
        FactorNode::Split { n1, f11, s22, v12, u21, v21, w12, .. } => {
            let (b1, mut b2) = split_rows(b, *n1);
            let mut y1 = solve(f11, &b1);
            if let Some(t) = low_rank_apply(u21, v21, &y1) {
                b2.axpy(-1.0, &t);
            }
            let x2 = solve(s22, &b2);
            if let Some(t) = low_rank_apply(w12, v12, &x2) {
                y1.axpy(-1.0, &t);
            }
            y1.vcat(&x2)
        }
    }
}

fn solve_t(f: &FactorNode, b: &DenseMatrix) -> DenseMatrix {
    match f {
        FactorNode::Leaf(lu) => lu.solve_transpose(b),
        FactorNode::Split { n1, f11, s22, u12, v12, u21, wt21, .. } => {
            let (b1, mut b2) = split_rows(b, *n1);
            let mut y1 = solve_t(f11, &b1);
            if let Some(t) = low_rank_apply(v12, u12, &y1) {
                b2.axpy(-1.0, &t);
            }
            let x2 = solve_t(s22, &b2);
            if let Some(t) = low_rank_apply(wt21, u21, &x2) {
                y1.axpy(-1.0, &t);
            }
            y1.vcat(&x2)
        }
    }
}

/// Factored HODLR matrix; solves are read-only.
#[derive(Debug, Clone)]
pub struct HodlrFactor {
    root: FactorNode,
    perm: Vec<usize>,
}

impl HodlrFactor {
    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_mat(&DenseMatrix::from_col_major(b.len(), 1, b.to_vec())).into_vec()
    }

    pub fn solve_mat(&self, b: &DenseMatrix) -> DenseMatrix {
        permute_out(&self.perm, &solve(&self.root, &permute_in(&self.perm, b)))
    }

    pub fn solve_transpose_mat(&self, b: &DenseMatrix) -> DenseMatrix {
        permute_out(&self.perm, &solve_t(&self.root, &permute_in(&self.perm, b)))
    }

    /// Stored scalars of the factors.
    pub fn storage(&self) -> usize {
        fn walk(f: &FactorNode) -> usize {
            match f {
                FactorNode::Leaf(lu) => lu.dim() * lu.dim(),
                FactorNode::Split { f11, s22, u12, v12, u21, v21, w12, wt21, .. } => {
                    walk(f11)
                        + walk(s22)
                        + [u12, v12, u21, v21, w12, wt21].iter().map(|m| m.n_rows() * m.n_cols()).sum::<usize>()
                }
            }
        }
        walk(&self.root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hier::KernelSpec;
    use crate::sparse::Point;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn uniform_1d(n: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| [rng.gen::<f64>(), 0.0, 0.0]).collect()
    }

    fn rel(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
        a.sub(b).norm_fro() / b.norm_fro()
    }

    #[test]
    fn diagonal_source_has_rank_zero() {
        let tree = ClusterTree::algebraic(64, 8);
        let h = HodlrMatrix::from_entries(&tree, 1e-8, |i, j| if i == j { 2.0 } else { 0.0 });
        assert_eq!(h.max_rank(), 0);
        assert_eq!(h.storage(), 8 * 64);
        let x: Vec<f64> = (0..64).map(|i| i as f64).collect();
        assert_eq!(h.matvec(&x), x.iter().map(|v| 2.0 * v).collect::<Vec<_>>());
        assert_eq!(h.matvec(&[0.0; 64]), vec![0.0; 64]);
    }

    #[test]
    fn rank_one_coupling() {
        let tree = ClusterTree::algebraic(16, 8);
        let a: Vec<f64> = (0..16).map(|i| 1.0 + i as f64).collect();
        let h = HodlrMatrix::from_entries(&tree, 1e-12, |i, j| if (i < 8) == (j < 8) { (i == j) as u8 as f64 } else { a[i] * a[j] });
        let r = h.ranks();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|b| b.rank == 1 && b.level == 0));
    }

    #[test]
    fn gaussian_matvec_and_storage() {
        let k = KernelSpec::gaussian(uniform_1d(512, 5), 0.5);
        let tree = ClusterTree::geometric(&k.points, 16);
        let h = HodlrMatrix::from_entries(&tree, 1e-8, |i, j| k.entry(i, j));
        let dense = k.to_dense();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = DenseMatrix::random_normal(512, 1, &mut rng);
        assert!(rel(&h.matmul(&x), &dense.matmul(&x)) <= 1e-6);
        assert!((h.storage() as f64) < 0.35 * (512.0 * 512.0));
        assert!(rel(&h.to_dense(), &dense) <= 10.0 * 1e-8);
        let via_dense = h.to_dense().matmul(&x);
        assert!(rel(&h.matmul(&x), &via_dense) <= 1e-12);
    }

    #[test]
    fn dense_construction_handles_sparse_blocks() {
        // Mostly-zero off-diagonal blocks with a few isolated entries.
        let n = 64;
        let m = DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                4.0
            } else if (i * 31 + j * 17) % 23 == 0 {
                -1.0
            } else {
                0.0
            }
        });
        let tree = ClusterTree::algebraic(n, 8);
        for tol in [1e-6, 1e-10] {
            let h = HodlrMatrix::from_dense(&tree, tol, &m);
            assert!(rel(&h.to_dense(), &m) <= 10.0 * tol);
        }
    }

    #[test]
    fn block_diagonal_factor_is_leafwise() {
        let tree = ClusterTree::algebraic(32, 8);
        let h = HodlrMatrix::from_entries(&tree, 1e-10, |i, j| {
            if i / 8 != j / 8 {
                0.0
            } else if i == j {
                4.0
            } else {
                1.0 / (1.0 + (i + 2 * j) as f64)
            }
        });
        let f = h.factor().unwrap();
        let b: Vec<f64> = (0..32).map(|i| (i as f64).sin()).collect();
        let x = f.solve(&b);
        let d = h.to_dense();
        for blk in 0..4 {
            let r = blk * 8..blk * 8 + 8;
            let lu = LuFactors::factor(d.submatrix(r.clone(), r.clone())).unwrap();
            let xb = lu.solve_vec(&b[r.clone()]);
            for (k, i) in r.enumerate() {
                assert!((x[i] - xb[k]).abs() <= 1e-14 * xb[k].abs().max(1.0));
            }
        }
    }

    #[test]
    fn shifted_gaussian_solve() {
        let k = KernelSpec::gaussian(uniform_1d(256, 11), 0.5);
        let tree = ClusterTree::geometric(&k.points, 16);
        let h = HodlrMatrix::from_entries(&tree, 1e-8, |i, j| k.entry(i, j) + if i == j { 1.0 } else { 0.0 });
        let f = h.factor().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = DenseMatrix::random_normal(256, 2, &mut rng);
        let x = f.solve_mat(&b);
        let mut dense = k.to_dense();
        for i in 0..256 {
            dense[(i, i)] += 1.0;
        }
        assert!(rel(&dense.matmul(&x), &b) <= 1e-6);
        let xt = f.solve_transpose_mat(&b);
        assert!(rel(&dense.t_matmul(&xt), &b) <= 1e-6);
    }

    #[test]
    fn compressed_spd_matches_dense_lu() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let pts = uniform_1d(128, 4);
        let g = KernelSpec::laplace3d(pts.clone());
        let w = DenseMatrix::random_uniform(128, 4, &mut rng).scaled(0.1);
        let mut spd = g.to_dense().matmul_t(&g.to_dense()).scaled(1e-3);
        spd.axpy(1.0, &w.matmul_t(&w));
        for i in 0..128 {
            spd[(i, i)] += 1.0;
        }
        let tree = ClusterTree::geometric(&pts, 16);
        let h = HodlrMatrix::from_entries(&tree, 1e-10, |i, j| spd[(i, j)]);
        let b: Vec<f64> = (0..128).map(|i| 1.0 + (i % 7) as f64).collect();
        let x = h.factor().unwrap().solve(&b);
        let xd = LuFactors::factor(spd.clone()).unwrap().solve_vec(&b);
        let err = x.iter().zip(&xd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let nrm = xd.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(err / nrm <= 1e-6, "{}", err / nrm);
    }

    #[test]
    fn matvec_construction_matches_entries() {
        let k = KernelSpec::gaussian(uniform_1d(200, 8), 0.3);
        let dense = k.to_dense();
        let tree = ClusterTree::geometric(&k.points, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = HodlrMatrix::from_matvec(&tree, 1e-8, |x| dense.matmul(x), |x| dense.t_matmul(x), &mut rng);
        assert!(rel(&h.to_dense(), &dense) <= 10.0 * 1e-8);
    }

    #[test]
    fn laplace_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let pts: Vec<Point> = (0..300).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
        let k = KernelSpec::laplace3d(pts);
        let tree = ClusterTree::geometric(&k.points, 32);
        for tol in [1e-6, 1e-8] {
            let h = HodlrMatrix::from_entries(&tree, tol, |i, j| k.entry(i, j));
            assert!(rel(&h.to_dense(), &k.to_dense()) <= 10.0 * tol);
        }
    }

    #[test]
    fn singular_leaf_is_named() {
        let tree = ClusterTree::algebraic(16, 8);
        let h = HodlrMatrix::from_entries(&tree, 1e-10, |i, j| if i == j && i != 10 { 1.0 } else { 0.0 });
        assert_eq!(h.factor().unwrap_err(), Error::SingularLeaf { leaf: 1, column: 2 });
    }

    #[test]
    fn rank_csv_header() {
        let tree = ClusterTree::algebraic(32, 8);
        let h = HodlrMatrix::from_entries(&tree, 1e-10, |i, j| 1.0 / (1.0 + (i as f64 - j as f64).abs()));
        let csv = h.rank_csv();
        assert!(csv.starts_with("level,block_row,block_col,rank,rows,cols\n"));
        assert_eq!(csv.lines().count(), 1 + h.ranks().len());
    }
}
