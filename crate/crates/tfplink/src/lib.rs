//! Simulation and evaluation library for time-frequency-packed coherent
//! optical links.
//!
//! The pipeline mirrors a realistic long-haul transmission experiment:
//! sub-Nyquist-packed multicarrier signals are generated ([`txchain`]),
//! propagated through a nonlinear amplified fiber link ([`fiberlink`]),
//! detected per carrier with channel-shortened MAP receivers ([`rxfront`],
//! [`isidet`]), and scored by achievable information rate and spectral
//! efficiency under mismatched decoding ([`infomax`]), optionally closing
//! an LDPC turbo loop ([`codedloop`]). [`exp`] wires full experiments from
//! config files and persists results.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod dsp;
pub mod error;
pub mod sigkit;
pub mod txchain;
pub mod fiberlink;
pub mod rxfront;
pub mod isidet;
pub mod infomax;
pub mod codedloop;
pub mod exp;

pub use error::{Error, Result};
