//! Moments of the multiple-point range of planar simple random walks and
//! the characteristic function of the renormalized intersection local time
//! of planar Brownian motion.
//!
//! The crate is organised by task:
//!
//! * [`graph_enum`] enumerates adjacency matrices of Eulerian multidigraphs
//!   and computes their combinatorial weights.
//! * [`special_fn`] holds the Bessel, elliptic and reciprocal-Gamma numerics
//!   and the vertex functions.
//! * [`lattice_green`] computes walk generating functions and first-hit
//!   determinants with exact series arithmetic.
//! * [`feynman`] evaluates the Bessel-kernel graph integrals and their
//!   weighted sums.
//! * [`moments`] assembles asymptotic moment expansions and characteristic
//!   function series.
//! * [`walk_oracle`] enumerates and samples walks as ground truth.
//!
//! Loops that are data parallel go through [`par`]; with the default
//! `rayon` feature they use a work-stealing pool, and results are identical
//! with or without it.

pub mod error;
pub mod feynman;
pub mod graph_enum;
pub mod lattice_green;
pub mod moments;
pub mod par;
pub mod series;
pub mod special_fn;
pub mod taylor;
pub mod walk_oracle;

pub use error::{Error, Result};
