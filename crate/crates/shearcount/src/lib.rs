//! Exact lattice point counts of sheared Euclidean lattices in balls,
//! the oscillatory machinery controlling their remainders, and Monte-Carlo
//! experiments over shear families.

pub mod cache;
pub mod cli;
pub mod counting;
pub mod decomp;
pub mod enumerate;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod oscsum;
pub mod specfun;

pub use error::{Error, Result};
