//! Numerical laboratory for planar 3-rarefaction waves of the compressible
//! Navier-Stokes-Fourier system: exact and smoothed wave construction,
//! a 3D finite-difference solver on a slab with periodic transverse
//! directions, relative-entropy diagnostics, and decay-rate fitting.

pub mod commands;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod quad;
pub mod solver;
pub mod thermo;
pub mod wave;

pub use error::{Error, Result};
