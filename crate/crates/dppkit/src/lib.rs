//! Exact sampling and diagnostics for determinantal point processes on lattices and grids.

pub mod completeness;
pub mod correlations;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod linstat;
pub mod negassoc;
pub mod reconstruct;
pub mod rigidity;
pub mod rng;
pub mod sampler;
pub mod spectra;

pub use error::{Error, Result};
