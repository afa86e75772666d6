//! Anisotropic bootstrap percolation: the cellular automaton, exact
//! small-instance oracles, closed-form asymptotics, the variational
//! growth principle, and a seeded Monte Carlo harness.

pub mod error;
pub mod exact;
pub mod asymptotics;
pub mod lattice;
pub mod mc;
pub mod par;
pub mod variational;

pub use error::{Error, Result};
