//! Cluster trees, admissibility, kernel matrices, and the HODLR and BLR
//! data-sparse formats.

mod blr;
mod cluster;
mod hodlr;
mod kernel;

pub use blr::{BlrFactor, BlrMatrix, Tile};
pub use cluster::{admissible, AdmissibilityMode, AdmissibilityParams, BoundingBox, ClusterNode, ClusterTree};
pub use hodlr::{BlockRank, HodlrFactor, HodlrMatrix};
pub use kernel::{KernelKind, KernelSpec};
