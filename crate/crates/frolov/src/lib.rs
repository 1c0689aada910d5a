//! Lattice cubature over the unit cube with randomized dilations and shifts.
//!
//! The library builds generator matrices from integer polynomial roots,
//! enumerates the lattice nodes that land in a support box, evaluates the
//! deterministic rule and its randomized (dilated, shifted) and transformed
//! variants, and provides the Fourier-side diagnostics and the convergence
//! harness that measure how fast the errors fall.

pub mod accum;
pub mod corpus;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod matrix;
pub mod polynomial;
pub mod quadrature;
pub mod rule;
pub mod spectral;
pub mod transform;

pub use error::{Error, Result};
