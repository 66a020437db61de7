//! Sparse storage, ingestion, preprocessing and symbolic analysis.

mod csc;
mod equilibrate;
mod matrix_market;
mod model;
mod ordering;
mod symbolic;

pub use csc::{check_permutation, invert_permutation, read_permutation, write_permutation, Scalar, SparseMatrix};
pub use equilibrate::{equilibrate, Equilibration, RHO};
pub use matrix_market::{parse_matrix_market, write_matrix_market, MatrixMarket, ParseError, ParseErrorKind};
pub use model::{model_problem, parse_model_spec, ModelKind, Point};
pub use ordering::{nested_dissection, SeparatorNode, SeparatorTree, DEFAULT_LEAF_CUTOFF};
pub use symbolic::{symbolic_factorize, symbolic_factorize_with, EliminationStructure, DEFAULT_RELAX};
