//! Dense building blocks: LU, triangular solves, GEMM and the low-rank
//! compression primitives used by the data-sparse formats.

mod aca;
mod blas;
mod id;
mod lowrank;
mod lu;
mod matrix;
pub(crate) mod qr;
mod sketch;
mod svd;

pub use aca::{aca, aca_with, AcaOptions};
pub use blas::{gemm, trsm, trsm_in_place, Side, Triangle, TrsmFlags};
pub use id::{interpolative_decomposition, Skeleton};
pub use lowrank::LowRankFactor;
pub use lu::{lu_partial_pivot, LuFactors};
pub use matrix::DenseMatrix;
pub use qr::{pivoted_qr, qr, PivotedQr, Qr};
pub use sketch::{randomized_range, SketchOptions};
pub use svd::{svd, truncated_svd, Svd};
