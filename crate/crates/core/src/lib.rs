//! Continuous-time quantum walks on one-dimensional waveguide lattices.
//!
//! Light in weakly coupled single-mode waveguides obeys the same
//! nearest-neighbour equations as a quantum walker on a chain, with the
//! propagation distance `z` taking the role of time. This crate builds the
//! lattice generator, propagates states with three independent methods,
//! provides closed-form references (Bessel, method of images, classical
//! random walk), runs seeded disorder and dephasing ensembles and reduces
//! everything to intensity observables.

pub mod ensemble;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod observables;
pub mod oracles;
pub mod propagate;
pub mod special;

pub use error::{Error, Result};
