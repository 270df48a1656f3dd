//! Sensor-attack detection and correction for autonomous discrete-time LTI
//! systems described by polynomial kernel representations `R(σ)y = 0`.
//!
//! The crate computes the security index of a system, decides whether a
//! received signal was tampered with by checking the residual `R(σ)r`, and
//! reconstructs the attack-free outputs with a bank of Bézout observers whose
//! outputs are combined by majority vote.

pub mod engine;
pub mod error;
mod labels;
pub mod polyalg;
pub mod security;
pub mod signals;
pub mod sim;

pub use error::{Error, Result};
