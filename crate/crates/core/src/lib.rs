//! Rank-structured multifrontal sparse direct solver toolkit.
//!
//! The pipeline: [`sparse`] ingests or generates a matrix, equilibrates
//! and orders it, and computes the supernodal elimination structure;
//! [`multifrontal`] factors the fronts densely or with [`hier`] BLR/HODLR
//! compression; [`krylov`] wraps the approximate factorization as a GMRES
//! preconditioner. [`sptrsv`] and [`commsim`] model the parallel
//! triangular solve and the 2D/3D process-grid communication costs.

pub mod cli;
pub mod commsim;
pub mod dense;
pub mod error;
pub mod hier;
pub mod krylov;
pub mod multifrontal;
pub mod sparse;
pub mod sptrsv;

pub use error::{Error, Result};
