//! Sparsified generalized graph diffusion.
//!
//! A graph is transformed into a new weighted graph in four steps: build a
//! transition matrix, sum a diffusion series over its powers, sparsify the
//! (usually dense) result, and renormalize. Around that pipeline the crate
//! provides spectral analysis tools and a synthetic clustering harness.

pub mod cli;
pub mod cluster;
pub mod coefficients;
pub mod csc;
pub mod diffusion;
mod error;
pub mod graph;
pub mod io;
pub mod pipeline;
pub mod sparsify;
pub mod spectral;

pub use error::{Error, Result};
