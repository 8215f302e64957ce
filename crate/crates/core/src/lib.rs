//! Sparse cubical tensors, hypergraph Laplacians, Perron eigenpairs,
//! structural balance of signed hypergraphs, and consensus dynamics.
//!
//! Indices are 0-based in the API and 1-based in every JSON document.

pub mod balance;
pub mod dynamics;
mod error;
pub mod hypergraph;
pub mod repro;
pub mod spectral;
pub mod tensor;

pub use balance::{BalanceCertificate, FactionVector};
pub use error::{Error, Result};
pub use hypergraph::{Hyperedge, Hypergraph, LaplacianSpec};
pub use tensor::{CubicalTensor, EigenPair};
