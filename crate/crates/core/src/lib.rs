//! Free-electron / nonlinear-cavity simulator.
//!
//! The crate propagates the joint density matrix of a free electron's
//! energy ladder coupled to a nonlinear (Kerr or Jaynes-Cummings) cavity
//! under a Lindblad master equation, compares the result against closed-form
//! scattering matrices, extracts spectra and level statistics, and composes
//! and verifies the electron-mediated single- and two-qubit gate set.
//!
//! Units: ħ = 1 and the bare cavity frequency ω = 1. All rates and detunings
//! are ratios to ω; times are in units of 1/ω.

pub mod cavity;
pub mod dynamics;
pub mod gates;
pub mod ladder;
pub mod linalg;
pub mod observables;
pub mod runner;
pub mod tensor;

mod error;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Factor label of the free-electron energy ladder.
pub const LADDER: &str = "el";
/// Factor label of the electron path register used by the gate circuits.
pub const PATH: &str = "path";
/// Factor label of the cavity photon mode.
pub const CAVITY: &str = "cav";
/// Factor label of the two-level emitter (Jaynes-Cummings model only).
pub const EMITTER: &str = "emitter";
