//! Simulation and analysis of pion-pair intensity interferometry.
//!
//! The crate covers four layers that build on each other:
//!
//! * [`linalg`]: dense complex states and operators on tensor-product spaces.
//! * [`witness`]: the charge-qubit model of detected pion pairs and the
//!   purity-based entanglement witness.
//! * [`optics`]: plane-wave interference amplitudes, closed-form coherence
//!   curves and a numerical van Cittert–Zernike transform.
//! * [`fock`]: a truncated bosonic Fock space for π⁺/π⁻/ρ modes, first-order
//!   pair production and charge-resolved coincidence correlators.
//! * [`estimation`]: recovery of source geometry from coherence curves.

pub mod error;
pub mod estimation;
pub mod fock;
pub mod linalg;
pub mod optics;
pub mod witness;

pub use error::{Error, Result};
