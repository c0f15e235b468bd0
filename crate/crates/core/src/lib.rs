//! Coding trees for graph classification.

pub mod entropy;
pub mod error;
pub mod eval;
pub mod graph;
pub mod hrn;
pub mod kernel;
pub mod tree;

pub use error::{Error, Result};
