//! Computational kernels for free-by-cyclic groups given by graph self-maps.
//!
//! The crate covers the combinatorics of a graph map `φ: V → V` (free
//! reduction, directions, legality), its filtration into strata with
//! Perron-Frobenius data, the mapping torus `X` and finite balls in its
//! universal cover, the forward flow on vertical edges with exact rational
//! positions, immersed walls built from busts and tunnels, and desk-scale
//! separation checks including a Sageev dual cube complex.
//!
//! Everything here is `no_std` with `alloc`. File formats, reports and the
//! command-line front end live in the companion `mtwall` crate.
#![no_std]
#![forbid(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;

pub mod ball;
pub mod cutting;
mod error;
pub mod flow;
pub mod graph;
pub mod rational;
pub mod strata;
pub mod torus;
pub mod walls;

pub use error::{Error, Result};
