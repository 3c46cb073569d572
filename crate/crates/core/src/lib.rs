//! Spectrum-sensing performance of energy detectors behind impaired RF
//! front ends.
//!
//! The crate evaluates false-alarm and detection probabilities in closed form
//! for a multi-channel receiver with IQ imbalance, amplifier nonlinearity and
//! oscillator phase noise, fuses them across cooperating sensors, and checks
//! every closed form against a seeded Monte Carlo simulation of the same
//! statistical model.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod cooperative;
pub mod detection;
pub mod error;
pub mod experiment;
pub mod impairments;
pub mod montecarlo;
pub mod quad;
pub mod report;
pub mod special;

pub use error::{Error, Result};
