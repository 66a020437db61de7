//! Multifrontal LU over the supernodal assembly tree, with optional
//! BLR or HODLR compression of large fronts.

mod engine;
mod front;
mod stats;
mod tree;

pub use engine::{factorize_with_structure, multifrontal_factorize, Engine, MultifrontalFactor, Scheduler, Sequential};
pub use front::{extend_add, factor_front, Compression, FactoredFront, FrontFactor, FrontalMatrix, Policy, Representation, UpdateMatrix};
pub use stats::{FactorStats, NodeStats, Timings};
pub use tree::{build_assembly_tree, AssemblyNode, AssemblyTree};
