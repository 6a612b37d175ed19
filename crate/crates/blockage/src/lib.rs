//! Post-process qd-realization channel traces with mobile obstacles.
//!
//! The physics lives in [`blockage_core`]; this crate adds the trace file
//! format, the run configuration and the command-line driver.

pub mod error;
pub mod qd;
pub mod runner;
pub mod spec;
pub mod sweeps;

pub use error::{Category, Error, Result};
