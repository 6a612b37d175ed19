//! Obstacle injection and diffraction loss models for ray-traced
//! millimeter-wave channel traces.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration and
//! the command line live in the `blockage` crate.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod diffraction;
pub mod environment;
pub mod geometry;
pub mod linkeval;
pub mod obstacles;
pub mod sweep;
pub mod trace;

mod diagnostics;
pub(crate) mod math;

pub use diagnostics::Diagnostics;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Wavelength in meters for a carrier frequency in Hz.
pub fn wavelength(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz
}
