//! Dynamics and control of a shape-memory-alloy (SMA) two-bar truss.
//!
//! The crate models a von Mises truss whose bars follow a fifth-degree
//! polynomial (Falk) stress-strain law. Depending on temperature the
//! structure has up to seven equilibrium configurations and, under periodic
//! loading, exhibits snap-through and chaotic vibration. A feedback
//! linearization controller, optionally augmented by a single-input
//! Takagi-Sugeno-Kang fuzzy compensator, suppresses those vibrations.
//!
//! Module map:
//! - [`constitutive`]: dimensional stress-strain law and truss kinematics
//! - [`dynamics`]: nondimensional equations of motion and equilibria
//! - [`fuzzy`]: TSK inference over the combined tracking error
//! - [`control`]: control laws, gain construction, convergence bounds
//! - [`sim`]: fixed-step RK4 scenario engine with dual-rate sampling

pub mod constitutive;
pub mod control;
pub mod dynamics;
mod error;
pub mod fuzzy;
pub mod sim;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
