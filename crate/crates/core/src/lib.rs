//! Simulation of slow electron wavepackets in a phase-matched optical grating.

pub mod analysis;
pub mod config;
pub mod constants;
pub mod dirac;
pub mod error;
pub mod field;
pub mod numerics;
pub mod io;
pub mod physics;
pub mod presets;
pub mod runner;
pub mod sweep;
pub mod tdse;
pub mod tridiag;
pub mod wavepacket;

pub use error::{Error, Result};
