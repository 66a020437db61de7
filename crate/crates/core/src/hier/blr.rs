//! Single-level block low-rank matrices with tile LU.

use crate::dense::{truncated_svd, DenseMatrix, LowRankFactor, LuFactors};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub enum Tile {
    Dense(DenseMatrix),
    LowRank(LowRankFactor),
}

impl Tile {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Tile::Dense(d) => d.shape(),
            Tile::LowRank(f) => (f.n_rows(), f.n_cols()),
        }
    }

    pub fn storage(&self) -> usize {
        match self {
            Tile::Dense(d) => d.n_rows() * d.n_cols(),
            Tile::LowRank(f) => f.storage(),
        }
    }

    /// `None` for dense tiles.
    pub fn rank(&self) -> Option<usize> {
        match self {
            Tile::Dense(_) => None,
            Tile::LowRank(f) => Some(f.rank()),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Tile::Dense(d) => d.clone(),
            Tile::LowRank(f) => f.to_dense(),
        }
    }

    fn matvec_sub(&self, x: &[f64], y: &mut [f64]) {
        let t = match self {
            Tile::Dense(d) => d.matvec(x),
            Tile::LowRank(f) => {
                if f.rank() == 0 {
                    return;
                }
                f.matvec(x)
            }
        };
        for (a, b) in y.iter_mut().zip(t) {
            *a -= b;
        }
    }

    /// Dense unless the low-rank form stores fewer scalars.
    fn from_factor(f: LowRankFactor) -> Tile {
        let (m, n) = (f.n_rows(), f.n_cols());
        if f.rank() * (m + n) < m * n {
            Tile::LowRank(f)
        } else {
            Tile::Dense(f.to_dense())
        }
    }
}

fn compress_tile(block: DenseMatrix, tol: f64) -> Tile {
    let f = truncated_svd(&block, tol);
    let (m, n) = block.shape();
    if f.rank() * (m + n) < m * n {
        Tile::LowRank(f)
    } else {
        Tile::Dense(block)
    }
}

/// Square matrix cut into a q×q grid with identical row and column
/// partitions. Diagonal tiles are always dense.
#[derive(Debug, Clone)]
pub struct BlrMatrix {
    offsets: Vec<usize>,
    tiles: Vec<Tile>,
    tol: f64,
}

impl BlrMatrix {
    /// Uniform tiles of size `tile` (the last one may be smaller).
    pub fn compress(f: &DenseMatrix, tile: usize, tol: f64) -> Result<Self> {
        if tile < 8 {
            return Err(Error::Config(format!("BLR tile size must be at least 8, got {tile}")));
        }
        let n = f.n_rows();
        let mut offsets: Vec<usize> = (0..n).step_by(tile).collect();
        offsets.push(n);
        Self::compress_with_offsets(f, offsets, tol, usize::MAX)
    }

    /// Tiles given by `offsets`; tiles whose row and column index are both
    /// at least `dense_from` stay dense.
    pub fn compress_with_offsets(f: &DenseMatrix, offsets: Vec<usize>, tol: f64, dense_from: usize) -> Result<Self> {
        if !f.is_square() {
            return Err(Error::Dimension(format!("BLR needs a square matrix, got {}x{}", f.n_rows(), f.n_cols())));
        }
        let valid = offsets.first() == Some(&0)
            && offsets.last() == Some(&f.n_rows())
            && offsets.windows(2).all(|w| w[0] < w[1]);
        if !valid && f.n_rows() > 0 {
            return Err(Error::Structure(format!("tile offsets {offsets:?} do not partition 0..{}", f.n_rows())));
        }
        let q = offsets.len().saturating_sub(1);
        let mut tiles = Vec::with_capacity(q * q);
        for i in 0..q {
            for j in 0..q {
                let block = f.submatrix(offsets[i]..offsets[i + 1], offsets[j]..offsets[j + 1]);
                let keep_dense = i == j || (i >= dense_from && j >= dense_from);
                tiles.push(if keep_dense { Tile::Dense(block) } else { compress_tile(block, tol) });
            }
        }
        Ok(Self { offsets, tiles, tol })
    }

    pub fn n(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn n_tiles(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn tile(&self, i: usize, j: usize) -> &Tile {
        &self.tiles[i * self.n_tiles() + j]
    }

    pub fn storage(&self) -> usize {
        self.tiles.iter().map(Tile::storage).sum()
    }

    pub fn max_rank(&self) -> usize {
        self.tiles.iter().filter_map(Tile::rank).max().unwrap_or(0)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let q = self.n_tiles();
        let mut d = DenseMatrix::zeros(self.n(), self.n());
        for i in 0..q {
            for j in 0..q {
                d.set_block(self.offsets[i], self.offsets[j], &self.tile(i, j).to_dense());
            }
        }
        d
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let q = self.n_tiles();
        let mut y = vec![0.0; self.n()];
        for i in 0..q {
            let (r0, r1) = (self.offsets[i], self.offsets[i + 1]);
            for j in 0..q {
                let (c0, c1) = (self.offsets[j], self.offsets[j + 1]);
                let mut neg = vec![0.0; r1 - r0];
                self.tile(i, j).matvec_sub(&x[c0..c1], &mut neg);
                for (a, b) in y[r0..r1].iter_mut().zip(neg) {
                    *a -= b;
                }
            }
        }
        y
    }

    pub fn factor(self) -> Result<BlrFactor> {
        let q = self.n_tiles();
        self.factor_partial(q)
    }

    /// Right-looking tile LU over the first `n_elim` tile rows/columns:
    /// pivoted LU of each diagonal tile, triangular solves on the panel
    /// tiles in their compressed form, and low-rank Schur updates with
    /// recompression. Trailing tiles receive the Schur complement.
    pub fn factor_partial(self, n_elim: usize) -> Result<BlrFactor> {
        let q = self.n_tiles();
        let n_elim = n_elim.min(q);
        let tol = self.tol;
        let mut tiles = self.tiles;
        let mut addend_max = vec![0usize; q * q];
        let mut lus = Vec::with_capacity(n_elim);
        let mut flops = 0.0;
        for k in 0..n_elim {
            let diag = std::mem::replace(&mut tiles[k * q + k], Tile::Dense(DenseMatrix::zeros(0, 0))).to_dense();
            let nk = diag.n_rows() as f64;
            flops += 2.0 / 3.0 * nk * nk * nk;
            let lu = LuFactors::factor(diag).map_err(|e| match e {
                Error::SingularPivot { column } => Error::SingularTile { tile: k, column },
                other => other,
            })?;
            for j in k + 1..q {
                let t = finalize(std::mem::replace(&mut tiles[k * q + j], placeholder()), tol);
                tiles[k * q + j] = match t {
                    Tile::Dense(mut d) => {
                        lu.forward(&mut d);
                        Tile::Dense(d)
                    }
                    Tile::LowRank(mut f) => {
                        if f.rank() > 0 {
                            lu.forward(&mut f.u);
                        }
                        Tile::LowRank(f)
                    }
                };
            }
            for i in k + 1..q {
                let t = finalize(std::mem::replace(&mut tiles[i * q + k], placeholder()), tol);
                tiles[i * q + k] = match t {
                    Tile::Dense(d) => Tile::Dense(right_upper_solve(&lu, &d)),
                    Tile::LowRank(mut f) => {
                        if f.rank() > 0 {
                            f.v = upper_transpose_solve(&lu, &f.v);
                        }
                        Tile::LowRank(f)
                    }
                };
            }
            for i in k + 1..q {
                for j in k + 1..q {
                    let trailing = i >= n_elim && j >= n_elim;
                    let upd = product(&tiles[i * q + k], &tiles[k * q + j], &mut flops);
                    let slot = i * q + j;
                    let cur = std::mem::replace(&mut tiles[slot], placeholder());
                    tiles[slot] = subtract(cur, upd, i == j || trailing, tol, &mut addend_max[slot]);
                }
            }
            lus.push(lu);
        }
        for i in 0..q {
            for j in 0..q {
                if i >= n_elim && j >= n_elim {
                    let t = std::mem::replace(&mut tiles[i * q + j], placeholder());
                    tiles[i * q + j] = Tile::Dense(t.to_dense());
                } else if i != j {
                    let t = std::mem::replace(&mut tiles[i * q + j], placeholder());
                    tiles[i * q + j] = finalize(t, tol);
                }
            }
        }
        Ok(BlrFactor {
            offsets: self.offsets,
            tiles,
            lus,
            n_elim,
            flops,
        })
    }
}

fn placeholder() -> Tile {
    Tile::Dense(DenseMatrix::zeros(0, 0))
}

fn finalize(t: Tile, tol: f64) -> Tile {
    match t {
        Tile::LowRank(f) => {
            let converged = f.converged;
            let mut g = f.recompress(tol);
            g.converged = converged;
            Tile::from_factor(g)
        }
        d => d,
    }
}

/// `X U⁻¹` for a dense `X`.
fn right_upper_solve(lu: &LuFactors, x: &DenseMatrix) -> DenseMatrix {
    upper_transpose_solve(lu, &x.transpose()).transpose()
}

/// `U⁻ᵀ X`.
fn upper_transpose_solve(lu: &LuFactors, x: &DenseMatrix) -> DenseMatrix {
    let u = lu.packed();
    let n = u.n_rows();
    let mut y = x.clone();
    for c in 0..y.n_cols() {
        let col = y.col_mut(c);
        for i in 0..n {
            let mut s = col[i];
            for k in 0..i {
                s -= u[(k, i)] * col[k];
            }
            col[i] = s / u[(i, i)];
        }
    }
    y
}

enum Product {
    Dense(DenseMatrix),
    LowRank(DenseMatrix, DenseMatrix),
    Zero,
}

fn product(a: &Tile, b: &Tile, flops: &mut f64) -> Product {
    match (a, b) {
        (Tile::LowRank(f), _) if f.rank() == 0 => Product::Zero,
        (_, Tile::LowRank(g)) if g.rank() == 0 => Product::Zero,
        (Tile::LowRank(f), Tile::LowRank(g)) => {
            let core = f.v.t_matmul(&g.u);
            *flops += 2.0 * (f.v.n_rows() * f.rank() * g.rank() + f.u.n_rows() * f.rank() * g.rank()) as f64;
            Product::LowRank(f.u.matmul(&core), g.v.clone())
        }
        (Tile::LowRank(f), Tile::Dense(d)) => {
            *flops += 2.0 * (d.n_rows() * d.n_cols() * f.rank()) as f64;
            Product::LowRank(f.u.clone(), d.t_matmul(&f.v))
        }
        (Tile::Dense(d), Tile::LowRank(g)) => {
            *flops += 2.0 * (d.n_rows() * d.n_cols() * g.rank()) as f64;
            Product::LowRank(d.matmul(&g.u), g.v.clone())
        }
        (Tile::Dense(x), Tile::Dense(y)) => {
            *flops += 2.0 * (x.n_rows() * x.n_cols() * y.n_cols()) as f64;
            Product::Dense(x.matmul(y))
        }
    }
}

/// `cur - upd`. Low-rank sums are recompressed once their rank passes
/// twice the largest addend rank.
fn subtract(cur: Tile, upd: Product, force_dense: bool, tol: f64, addend_max: &mut usize) -> Tile {
    match (cur, upd) {
        (cur, Product::Zero) => cur,
        (Tile::Dense(mut d), Product::Dense(p)) => {
            d.axpy(-1.0, &p);
            Tile::Dense(d)
        }
        (Tile::Dense(mut d), Product::LowRank(x, y)) => {
            d.axpy(-1.0, &x.matmul_t(&y));
            Tile::Dense(d)
        }
        (Tile::LowRank(f), Product::Dense(p)) => {
            let mut d = f.to_dense();
            d.axpy(-1.0, &p);
            Tile::Dense(d)
        }
        (Tile::LowRank(f), Product::LowRank(x, y)) => {
            if force_dense {
                let mut d = f.to_dense();
                d.axpy(-1.0, &x.matmul_t(&y));
                return Tile::Dense(d);
            }
            *addend_max = (*addend_max).max(f.rank()).max(x.n_cols());
            let sum = f.concat(-1.0, &LowRankFactor::new(x, y, tol));
            if sum.rank() > 2 * *addend_max {
                let converged = sum.converged;
                let mut g = sum.recompress(tol);
                g.converged = converged;
                Tile::LowRank(g)
            } else {
                Tile::LowRank(sum)
            }
        }
    }
}

/// Tile LU factors. Eliminated rows/columns hold `P_kᵀ L_kk`, `U_kk` on
/// the diagonal, `L_ik` below and `U_kj` to the right; trailing tiles hold
/// the Schur complement.
#[derive(Debug, Clone)]
pub struct BlrFactor {
    offsets: Vec<usize>,
    tiles: Vec<Tile>,
    lus: Vec<LuFactors>,
    n_elim: usize,
    flops: f64,
}

impl BlrFactor {
    fn q(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    fn tile(&self, i: usize, j: usize) -> &Tile {
        &self.tiles[i * self.q() + j]
    }

    pub fn n(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    /// Number of eliminated rows.
    pub fn n_eliminated(&self) -> usize {
        self.offsets[self.n_elim]
    }

    pub fn flops(&self) -> f64 {
        self.flops
    }

    /// Stored scalars of the factor (tiles touching eliminated rows or
    /// columns, diagonal LU included).
    pub fn storage(&self) -> usize {
        let q = self.q();
        let mut s: usize = self.lus.iter().map(|lu| lu.dim() * lu.dim()).sum();
        for i in 0..q {
            for j in 0..q {
                if i != j && (i < self.n_elim || j < self.n_elim) {
                    s += self.tile(i, j).storage();
                }
            }
        }
        s
    }

    pub fn max_rank(&self) -> usize {
        let q = self.q();
        (0..q)
            .flat_map(|i| (0..q).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && (i < self.n_elim || j < self.n_elim))
            .filter_map(|(i, j)| self.tile(i, j).rank())
            .max()
            .unwrap_or(0)
    }

    /// Trailing Schur complement as a dense matrix.
    pub fn schur(&self) -> DenseMatrix {
        let q = self.q();
        let base = self.n_eliminated();
        let m = self.n() - base;
        let mut s = DenseMatrix::zeros(m, m);
        for i in self.n_elim..q {
            for j in self.n_elim..q {
                s.set_block(self.offsets[i] - base, self.offsets[j] - base, &self.tile(i, j).to_dense());
            }
        }
        s
    }

    /// Forward sweep over the eliminated tiles; trailing entries of `b`
    /// receive the coupling update.
    pub fn forward(&self, b: &mut [f64]) {
        let q = self.q();
        for k in 0..self.n_elim {
            let (r0, r1) = (self.offsets[k], self.offsets[k + 1]);
            let lu = &self.lus[k];
            let mut y = lu.permute_vec(&b[r0..r1]);
            lu.forward_vec_permuted(&mut y);
            b[r0..r1].copy_from_slice(&y);
            for i in k + 1..q {
                let (s0, s1) = (self.offsets[i], self.offsets[i + 1]);
                self.tile(i, k).matvec_sub(&y, &mut b[s0..s1]);
            }
        }
    }

    /// Backward sweep; trailing entries of `x` must already hold the
    /// trailing solution.
    pub fn backward(&self, x: &mut [f64]) {
        let q = self.q();
        for k in (0..self.n_elim).rev() {
            let (r0, r1) = (self.offsets[k], self.offsets[k + 1]);
            let mut t = x[r0..r1].to_vec();
            for j in k + 1..q {
                let (c0, c1) = (self.offsets[j], self.offsets[j + 1]);
                self.tile(k, j).matvec_sub(&x[c0..c1], &mut t);
            }
            self.lus[k].backward_vec(&mut t);
            x[r0..r1].copy_from_slice(&t);
        }
    }

    /// Full solve; requires every tile to be eliminated.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(self.n_elim, self.q(), "solve needs a complete factorization");
        let mut x = b.to_vec();
        self.forward(&mut x);
        self.backward(&mut x);
        x
    }
}
