//! Computable machinery for a single-scale fermionic renormalization group
//! analysis on a finite lattice.

pub mod config;
pub mod error;
pub mod grassmann;
pub mod insulator;
pub mod kernel;
pub mod lattice;
pub mod norm;
pub mod perm;
pub mod propagator;
pub mod report;
pub mod run;
pub mod sample;
pub mod verify;

pub use error::{Error, Result};
