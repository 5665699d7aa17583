//! First-passage percolation laboratory: weight distributions, lattice
//! passage times, limit-shape geometry, oriented percolation, competing
//! growth and geodesic-graph diagnostics.

pub mod convex;
pub mod error;
pub mod geograph;
pub mod growth;
pub mod lattice;
pub mod measure;
pub mod oriented;
pub mod rng;
pub mod shapeest;

pub use error::{Error, Result};
