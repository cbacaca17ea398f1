//! Exact engine for comparing two constructions of effective interactions
//! over a finite field model: scale-by-scale counterterms built by recursion
//! over a well-ordered index set, and subgraph-recursive counterterms in the
//! style of BPHZ. All arithmetic is exact rational.

pub mod amplitude;
pub mod config;
pub mod error;
pub mod graph;
pub mod model;
pub mod oracle;
pub mod renorm;
pub mod scale;

pub use error::{Error, Result};
