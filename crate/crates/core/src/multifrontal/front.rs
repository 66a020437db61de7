use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dense::{
    randomized_range, trsm_in_place, truncated_svd, DenseMatrix, LowRankFactor, LuFactors, SketchOptions, TrsmFlags,
};
use crate::error::{Error, Result};
use crate::hier::{BlrFactor, BlrMatrix, ClusterTree, HodlrFactor, HodlrMatrix};
use crate::sparse::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Compression {
    None,
    Blr,
    Hodlr,
}

impl std::str::FromStr for Compression {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Compression::None),
            "blr" => Ok(Compression::Blr),
            "hodlr" => Ok(Compression::Hodlr),
            _ => Err(Error::Config(format!("unknown compression {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Dense,
    Blr,
    Hodlr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Policy {
    /// Fronts with `|I^s| + |I^u|` below this are always dense.
    pub threshold_dense: usize,
    pub compression: Compression,
    pub tol: f64,
    pub tile: usize,
    pub leaf_size: usize,
    /// Strong-admissibility parameter; HODLR fronts use weak admissibility.
    pub eta: f64,
    pub seed: u64,
}

impl Default for Policy {
    fn default() -> Self {
        Self {
            threshold_dense: 256,
            compression: Compression::None,
            tol: 1e-6,
            tile: 32,
            leaf_size: 32,
            eta: 0.7,
            seed: 0,
        }
    }
}

impl Policy {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn representation_for(&self, front_size: usize, n_s: usize) -> Representation {
        if front_size < self.threshold_dense || n_s == 0 {
            return Representation::Dense;
        }
        match self.compression {
            Compression::None => Representation::Dense,
            Compression::Blr => Representation::Blr,
            Compression::Hodlr => Representation::Hodlr,
        }
    }
}

/// Dense working front over `indices = I^s ∪ I^u`; the leading `n_s`
/// rows/columns are fully summed.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontalMatrix {
    pub node: usize,
    pub indices: Vec<usize>,
    pub n_s: usize,
    pub data: DenseMatrix,
}

impl FrontalMatrix {
    pub fn zeros(node: usize, indices: Vec<usize>, n_s: usize) -> Self {
        let f = indices.len();
        Self {
            node,
            indices,
            n_s,
            data: DenseMatrix::zeros(f, f),
        }
    }

    pub fn n_u(&self) -> usize {
        self.indices.len() - self.n_s
    }

    pub fn f11(&self) -> DenseMatrix {
        self.data.submatrix(0..self.n_s, 0..self.n_s)
    }

    pub fn f12(&self) -> DenseMatrix {
        self.data.submatrix(0..self.n_s, self.n_s..self.indices.len())
    }

    pub fn f21(&self) -> DenseMatrix {
        self.data.submatrix(self.n_s..self.indices.len(), 0..self.n_s)
    }

    pub fn f22(&self) -> DenseMatrix {
        let f = self.indices.len();
        self.data.submatrix(self.n_s..f, self.n_s..f)
    }
}

/// Contribution block passed to the parent. The payload already carries
/// the minus sign of the Schur complement, so assembly only adds.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateMatrix {
    pub owner: usize,
    pub indices: Vec<usize>,
    pub payload: DenseMatrix,
}

impl UpdateMatrix {
    /// Payload `f22 - product`, where `product = F21 F11⁻¹ F12`.
    pub fn from_schur(owner: usize, indices: Vec<usize>, f22: Option<&DenseMatrix>, mut product: DenseMatrix) -> Self {
        product.scale(-1.0);
        if let Some(f22) = f22 {
            product.axpy(1.0, f22);
        }
        Self {
            owner,
            indices,
            payload: product,
        }
    }

    pub fn empty(owner: usize) -> Self {
        Self {
            owner,
            indices: Vec::new(),
            payload: DenseMatrix::zeros(0, 0),
        }
    }
}

/// Scatter-adds `t` into `f` by merging the two sorted index lists.
pub fn extend_add(f: &mut FrontalMatrix, t: &UpdateMatrix) -> Result<()> {
    let mut local = Vec::with_capacity(t.indices.len());
    let mut p = 0;
    for &g in &t.indices {
        while p < f.indices.len() && f.indices[p] < g {
            p += 1;
        }
        if p == f.indices.len() || f.indices[p] != g {
            return Err(Error::Structure(format!(
                "update index {g} from node {} is missing in front {}",
                t.owner, f.node
            )));
        }
        local.push(p);
    }
    for (cj, &lj) in local.iter().enumerate() {
        let src = t.payload.col(cj);
        let dst = f.data.col_mut(lj);
        for (ci, &li) in local.iter().enumerate() {
            dst[li] += src[ci];
        }
    }
    Ok(())
}

/// Factored front, stored in the form used by the tree sweeps.
#[derive(Debug, Clone)]
pub enum FrontFactor {
    /// `P F11 = L U`, `f12 = L⁻¹ P F12`, `f21 = F21 U⁻¹`.
    Dense {
        lu: LuFactors,
        f12: DenseMatrix,
        f21: DenseMatrix,
    },
    Blr {
        factor: BlrFactor,
    },
    /// `F11` as a factored HODLR matrix, `F12`, `F21` low-rank, and
    /// `w12 = F11⁻¹ U12`.
    Hodlr {
        f11: HodlrFactor,
        f12: LowRankFactor,
        f21: LowRankFactor,
        w12: DenseMatrix,
        max_rank: usize,
    },
}

impl FrontFactor {
    pub fn representation(&self) -> Representation {
        match self {
            FrontFactor::Dense { .. } => Representation::Dense,
            FrontFactor::Blr { .. } => Representation::Blr,
            FrontFactor::Hodlr { .. } => Representation::Hodlr,
        }
    }

    /// Stored scalars of the factor.
    pub fn storage(&self) -> usize {
        match self {
            FrontFactor::Dense { lu, f12, f21 } => lu.dim() * lu.dim() + f12.n_rows() * f12.n_cols() + f21.n_rows() * f21.n_cols(),
            FrontFactor::Blr { factor } => factor.storage(),
            FrontFactor::Hodlr { f11, f12, f21, w12, .. } => f11.storage() + f12.storage() + f21.storage() + w12.n_rows() * w12.n_cols(),
        }
    }

    pub fn max_rank(&self) -> usize {
        match self {
            FrontFactor::Dense { .. } => 0,
            FrontFactor::Blr { factor } => factor.max_rank(),
            FrontFactor::Hodlr { max_rank, .. } => *max_rank,
        }
    }

    /// `[xs; xu] ← lower⁻¹ [xs; xu]` for this front.
    pub fn forward(&self, xs: &mut [f64], xu: &mut [f64]) {
        match self {
            FrontFactor::Dense { lu, f21, .. } => {
                let mut y = lu.permute_vec(xs);
                lu.forward_vec_permuted(&mut y);
                xs.copy_from_slice(&y);
                if !xu.is_empty() {
                    for (a, b) in xu.iter_mut().zip(f21.matvec(xs)) {
                        *a -= b;
                    }
                }
            }
            FrontFactor::Blr { factor } => {
                let mut v = xs.to_vec();
                v.extend_from_slice(xu);
                factor.forward(&mut v);
                let ns = xs.len();
                xs.copy_from_slice(&v[..ns]);
                xu.copy_from_slice(&v[ns..]);
            }
            FrontFactor::Hodlr { f11, f21, .. } => {
                let y = f11.solve(xs);
                xs.copy_from_slice(&y);
                if !xu.is_empty() && f21.rank() > 0 {
                    for (a, b) in xu.iter_mut().zip(f21.matvec(xs)) {
                        *a -= b;
                    }
                }
            }
        }
    }

    /// `xs ← upper⁻¹ (xs - coupling · xu)` given the solved `xu`.
    pub fn backward(&self, xs: &mut [f64], xu: &[f64]) {
        match self {
            FrontFactor::Dense { lu, f12, .. } => {
                if !xu.is_empty() {
                    for (a, b) in xs.iter_mut().zip(f12.matvec(xu)) {
                        *a -= b;
                    }
                }
                lu.backward_vec(xs);
            }
            FrontFactor::Blr { factor } => {
                let mut v = xs.to_vec();
                v.extend_from_slice(xu);
                factor.backward(&mut v);
                xs.copy_from_slice(&v[..xs.len()]);
            }
            FrontFactor::Hodlr { f12, w12, .. } => {
                if !xu.is_empty() && f12.rank() > 0 {
                    let t = w12.matvec(&f12.v.matvec_t(xu));
                    for (a, b) in xs.iter_mut().zip(t) {
                        *a -= b;
                    }
                }
            }
        }
    }
}

/// Result of factoring one front.
#[derive(Debug)]
pub struct FactoredFront {
    pub factor: FrontFactor,
    pub update: UpdateMatrix,
    pub flops: f64,
}

/// Factors an assembled front under `policy`. `points` are the
/// coordinates of the fully-summed variables, when known.
pub fn factor_front(front: FrontalMatrix, policy: &Policy, points: Option<&[Point]>) -> Result<FactoredFront> {
    let rep = policy.representation_for(front.indices.len(), front.n_s);
    let node = front.node;
    let wrap = |e: Error| Error::SingularFront {
        node,
        source: Box::new(e),
    };
    match rep {
        Representation::Dense => factor_dense(front).map_err(wrap),
        Representation::Blr => factor_blr(front, policy).map_err(wrap),
        Representation::Hodlr => factor_hodlr(front, policy, points).map_err(wrap),
    }
}

fn factor_dense(front: FrontalMatrix) -> Result<FactoredFront> {
    let (ns, nu) = (front.n_s, front.n_u());
    let (s, u) = (ns as f64, nu as f64);
    let flops = 2.0 / 3.0 * s * s * s + 2.0 * s * s * u + 2.0 * u * u * s;
    let lu = LuFactors::factor(front.f11())?;
    let mut f12 = front.f12();
    let mut f21 = front.f21();
    let update = if nu > 0 {
        lu.forward(&mut f12);
        trsm_in_place(lu.packed(), &mut f21, TrsmFlags::RIGHT_UPPER)?;
        let product = f21.matmul(&f12);
        UpdateMatrix::from_schur(front.node, front.indices[ns..].to_vec(), Some(&front.f22()), product)
    } else {
        UpdateMatrix::empty(front.node)
    };
    Ok(FactoredFront {
        factor: FrontFactor::Dense { lu, f12, f21 },
        update,
        flops,
    })
}

fn tile_offsets(len: usize, tile: usize, base: usize, out: &mut Vec<usize>) {
    let mut k = 0;
    while k < len {
        k = (k + tile).min(len);
        out.push(base + k);
    }
}

fn factor_blr(front: FrontalMatrix, policy: &Policy) -> Result<FactoredFront> {
    let (ns, nu) = (front.n_s, front.n_u());
    let mut offsets = vec![0];
    tile_offsets(ns, policy.tile.max(1), 0, &mut offsets);
    let q_s = offsets.len() - 1;
    tile_offsets(nu, policy.tile.max(1), ns, &mut offsets);
    let blr = BlrMatrix::compress_with_offsets(&front.data, offsets, policy.tol, q_s)?;
    let factor = blr.factor_partial(q_s)?;
    let update = if nu > 0 {
        UpdateMatrix {
            owner: front.node,
            indices: front.indices[ns..].to_vec(),
            payload: factor.schur(),
        }
    } else {
        UpdateMatrix::empty(front.node)
    };
    let flops = factor.flops();
    Ok(FactoredFront {
        factor: FrontFactor::Blr { factor },
        update,
        flops,
    })
}

fn factor_hodlr(front: FrontalMatrix, policy: &Policy, points: Option<&[Point]>) -> Result<FactoredFront> {
    let (ns, nu) = (front.n_s, front.n_u());
    let tree = match points {
        Some(p) if p.len() == ns => ClusterTree::geometric(p, policy.leaf_size),
        _ => ClusterTree::algebraic(ns, policy.leaf_size),
    };
    let h = HodlrMatrix::from_dense(&tree, policy.tol, &front.f11());
    let mut max_rank = h.max_rank();
    let hf = h.factor()?;
    let s = ns as f64;
    let mut flops = 2.0 * s * s * (h.max_rank().max(1) as f64) * s.log2().max(1.0);
    let (f12, f21) = if nu > 0 {
        (truncated_svd(&front.f12(), policy.tol), truncated_svd(&front.f21(), policy.tol))
    } else {
        (LowRankFactor::zero(ns, 0), LowRankFactor::zero(0, ns))
    };
    max_rank = max_rank.max(f12.rank()).max(f21.rank());
    let w12 = if f12.rank() > 0 { hf.solve_mat(&f12.u) } else { DenseMatrix::zeros(ns, 0) };
    let update = if nu > 0 {
        let guess = f12.rank().min(f21.rank());
        let mut rng = ChaCha8Rng::seed_from_u64(policy.seed ^ (front.node as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let opts = SketchOptions::with_guess(policy.tol, guess);
        let apply = |x: &DenseMatrix| {
            if f12.rank() == 0 || f21.rank() == 0 {
                return DenseMatrix::zeros(nu, x.n_cols());
            }
            f21.matmul(&w12.matmul(&f12.v.t_matmul(x)))
        };
        let apply_t = |x: &DenseMatrix| {
            if f12.rank() == 0 || f21.rank() == 0 {
                return DenseMatrix::zeros(nu, x.n_cols());
            }
            f12.t_matmul(&hf.solve_transpose_mat(&f21.t_matmul(x)))
        };
        let sketch = randomized_range(apply, apply_t, nu, nu, &opts, &mut rng);
        max_rank = max_rank.max(sketch.rank());
        let u = nu as f64;
        flops += 2.0 * u * u * sketch.rank() as f64;
        UpdateMatrix::from_schur(front.node, front.indices[ns..].to_vec(), Some(&front.f22()), sketch.to_dense())
    } else {
        UpdateMatrix::empty(front.node)
    };
    Ok(FactoredFront {
        factor: FrontFactor::Hodlr {
            f11: hf,
            f12,
            f21,
            w12,
            max_rank,
        },
        update,
        flops,
    })
}
