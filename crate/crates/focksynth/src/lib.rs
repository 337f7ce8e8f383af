//! Numerical simulator for an optical Fock-state synthesizer: a ring cavity
//! coupled to a traveling mode through a cross-Kerr medium, conditioned on an
//! on-off avalanche photodetector at the cavity output.
//!
//! The crate computes detection probabilities and conditional output density
//! matrices in a truncated Fock basis, for ideal and imperfect detectors, and
//! provides design helpers (resonance tuning, equal-weight superposition
//! amplitudes, transmissivity calibration) plus a brute-force multimode
//! verifier for the closed forms.

pub mod analysis;
pub mod cavity;
pub mod cli;
mod error;
pub mod fockspace;
pub mod oracle;
pub mod synthesizer;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
