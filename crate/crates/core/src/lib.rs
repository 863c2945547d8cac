//! Exact incidence geometry over finite fields in product spaces.
//!
//! The crate builds the multi-parameter objects of the product space
//! F_q^{d1} x F_q^{d2} — points, line-pairs, hyperplane-pairs, polarity-type
//! graphs — and verifies the incidence bounds and application estimates that
//! hold for them, by brute-force oracles, exact spectral computation and
//! seeded randomized trials. Everything is deterministic: the same field,
//! seed and parameters produce the same objects and the same reports on any
//! machine or thread count.

pub mod apps;
pub mod counting;
pub mod error;
pub mod geometry;
pub mod gf;
pub mod projective;
pub mod spectral;
pub mod theorems;

pub use error::{Error, Result};
