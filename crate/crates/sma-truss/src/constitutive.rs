//! Polynomial constitutive model of the SMA bars and truss kinematics.
//!
//! The uniaxial stress is a fifth-degree polynomial of the strain,
//!
//! ```text
//! sigma(eps, T) = a1 (T - T_M) eps - a2 eps^3 + a3 eps^5
//! ```
//!
//! whose free energy has a single minimum at zero strain above the austenite
//! temperature `T_A`, two martensitic minima below `T_M`, and all three in
//! between. This module works in the published units (MPa, K, rad); unit
//! conversion to SI happens only when the equation of motion is
//! nondimensionalized (see [`crate::dynamics`]).

use crate::{Error, Result};

/// Material constants of the polynomial stress-strain law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialProperties {
    /// Thermal modulus a1 (MPa/K).
    pub a1: f64,
    /// Cubic coefficient a2 (MPa).
    pub a2: f64,
    /// Quintic coefficient a3 (MPa).
    pub a3: f64,
    /// Temperature below which martensite is stable (K).
    pub t_m: f64,
}

impl MaterialProperties {
    pub fn new(a1: f64, a2: f64, a3: f64, t_m: f64) -> Result<Self> {
        if !(a1 > 0.0) {
            return Err(Error::InvalidMaterial(format!("a1 must be positive, got {a1}")));
        }
        if !(a2 > 0.0) {
            return Err(Error::InvalidMaterial(format!("a2 must be positive, got {a2}")));
        }
        if !(a3 > 0.0) {
            return Err(Error::InvalidMaterial(format!("a3 must be positive, got {a3}")));
        }
        if !(t_m > 0.0) {
            return Err(Error::InvalidMaterial(format!("T_M must be positive, got {t_m}")));
        }
        Ok(Self { a1, a2, a3, t_m })
    }

    /// Constants fitted to a Cu-Zn-Al-Ni alloy at 373 K.
    pub fn cu_zn_al_ni() -> Self {
        Self {
            a1: 523.29,
            a2: 1.868e7,
            a3: 2.186e9,
            t_m: 288.0,
        }
    }

    /// Uniaxial stress (MPa) at strain `eps` and temperature `t` (K).
    ///
    /// Evaluated in Horner form over eps^2 with a single final multiply by
    /// eps: a3 is ~5 orders above a1 (T - T_M), so naive monomial summation
    /// loses digits to cancellation.
    pub fn stress(&self, eps: f64, t: f64) -> f64 {
        let e2 = eps * eps;
        ((self.a3 * e2 - self.a2) * e2 + self.a1 * (t - self.t_m)) * eps
    }

    /// Temperature above which austenite is the only stable phase (K):
    /// `T_A = T_M + a2^2 / (4 a1 a3)`.
    pub fn austenite_temperature(&self) -> f64 {
        self.t_m + self.a2 * self.a2 / (4.0 * self.a1 * self.a3)
    }
}

/// Dimensional geometry and inertia of the two-bar truss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrussGeometry {
    /// Nominal bar length L0 (m).
    pub l0: f64,
    /// Nominal bar angle with the horizontal (rad), in (0, pi/2).
    pub phi0: f64,
    /// Bar cross-sectional area (m^2).
    pub area: f64,
    /// Mass lumped at the apex (kg).
    pub mass: f64,
    /// Viscous damping constant (N s/m); lumps all dissipation.
    pub damping: f64,
}

impl TrussGeometry {
    pub fn new(l0: f64, phi0: f64, area: f64, mass: f64, damping: f64) -> Result<Self> {
        if !(l0 > 0.0) {
            return Err(Error::InvalidGeometry(format!("L0 must be positive, got {l0}")));
        }
        if !(phi0 > 0.0 && phi0 < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidGeometry(format!(
                "phi0 must lie in (0, pi/2), got {phi0}"
            )));
        }
        if !(area > 0.0) {
            return Err(Error::InvalidGeometry(format!("area must be positive, got {area}")));
        }
        if !(mass > 0.0) {
            return Err(Error::InvalidGeometry(format!("mass must be positive, got {mass}")));
        }
        if !(damping >= 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "damping must be non-negative, got {damping}"
            )));
        }
        Ok(Self { l0, phi0, area, mass, damping })
    }

    /// Horizontal projection B = L0 cos(phi0) of each bar (m). The supports
    /// are fixed, so B is constant while the apex moves vertically.
    pub fn horizontal_projection(&self) -> f64 {
        self.l0 * self.phi0.cos()
    }
}

/// Bar strain for a current angle `phi`, given the nominal angle `phi0`:
/// `eps = cos(phi0)/cos(phi) - 1`.
///
/// Both angles must lie in (0, pi/2); at pi/2 the bar would be vertical and
/// the kinematics degenerate.
pub fn strain_from_angle(phi: f64, phi0: f64) -> Result<f64> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    if !(phi > 0.0 && phi < half_pi) {
        return Err(Error::AngleOutOfRange { phi });
    }
    if !(phi0 > 0.0 && phi0 < half_pi) {
        return Err(Error::AngleOutOfRange { phi: phi0 });
    }
    Ok(phi0.cos() / phi.cos() - 1.0)
}
