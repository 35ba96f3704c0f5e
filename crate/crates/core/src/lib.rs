//! Heralded entanglement of two spin-cavity nodes by conditional reflection of
//! a single photon in a Mach-Zehnder setup.
//!
//! Units: rates and frequencies are measured in the emitter decay rate of
//! transition 0 of node A; times in its inverse.

pub mod compare;
pub mod error;
pub mod model;
pub mod optimize;
pub mod protocol;
pub mod pulse;
pub mod readout;
pub mod spectral;
pub mod timedomain;

pub use error::{Error, Result};
