//! Discretized Seiberg-Witten functional on a flat periodic 4-torus.

pub mod checks;
pub mod clifford;
pub mod error;
pub mod fields;
pub mod functional;
pub mod gaugefix;
pub mod lattice;
pub mod operators;
pub mod optimize;
pub mod sum;

pub use error::{Error, Result};
