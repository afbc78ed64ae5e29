use std::fmt;

/// Errors produced by model construction, validation, and simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Material constants violate a physical constraint.
    InvalidMaterial(String),
    /// Truss geometry violates a physical constraint.
    InvalidGeometry(String),
    /// Nondimensional parameters violate a constraint.
    InvalidParams(String),
    /// A scenario field is inconsistent or out of range.
    InvalidScenario(String),
    /// A kinematic angle left the open interval (0, pi/2).
    AngleOutOfRange { phi: f64 },
    /// The state left the configured |x| guard during integration.
    BlowUp { tau: f64, x: f64, limit: f64 },
    /// The equilibrium scan bracketed an even number of roots, which
    /// indicates a missed tangency at the scan resolution.
    EvenRootCount { count: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidMaterial(msg) => write!(f, "invalid material properties: {msg}"),
            Error::InvalidGeometry(msg) => write!(f, "invalid truss geometry: {msg}"),
            Error::InvalidParams(msg) => write!(f, "invalid dynamics parameters: {msg}"),
            Error::InvalidScenario(msg) => write!(f, "invalid scenario: {msg}"),
            Error::AngleOutOfRange { phi } => {
                write!(f, "bar angle {phi} rad outside (0, pi/2); geometry degenerates")
            }
            Error::BlowUp { tau, x, limit } => {
                write!(f, "blow-up at tau = {tau}: |x| = {} exceeds guard {limit}", x.abs())
            }
            Error::EvenRootCount { count } => {
                write!(f, "equilibrium scan found {count} roots (even); possible missed tangency")
            }
        }
    }
}

impl std::error::Error for Error {}
