//! Nondimensional equations of motion of the SMA two-bar truss.
//!
//! With x = X/L0, b = B/L0 and tau = omega0 t, the symmetric vertical motion
//! obeys
//!
//! ```text
//! x' = y
//! y' = gamma sin(Omega tau) - xi y + r(x) + u
//! ```
//!
//! where the restoring acceleration r(x) comes from projecting the bar
//! stress onto the vertical. Writing u_len = sqrt(x^2 + b^2) for the current
//! bar length ratio and eps = u_len - 1 for the bar strain,
//!
//! ```text
//! r(x) = -x * sigma(eps) / u_len,
//! sigma(eps) = (theta - 1) eps - alpha2 eps^3 + alpha3 eps^5
//! ```
//!
//! Expanding sigma/u_len in powers of u_len reproduces the six-bracket brace
//! of the equation of motion; the factored form above avoids the ~7 digits
//! of cancellation the expanded brackets suffer at alpha3 ~ 1e4 (the test
//! suite checks both routes against each other).

use crate::constitutive::{MaterialProperties, TrussGeometry};
use crate::{Error, Result};

/// Nondimensional parameters of the forced truss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrussParams {
    /// Temperature ratio T/T_M.
    pub theta: f64,
    /// Viscous damping coefficient.
    pub xi: f64,
    /// Forcing amplitude.
    pub gamma: f64,
    /// Forcing frequency ratio omega/omega0.
    pub omega: f64,
    /// Material ratio a2/(a1 T_M).
    pub alpha2: f64,
    /// Material ratio a3/(a1 T_M).
    pub alpha3: f64,
    /// Geometry ratio B/L0 = cos(phi0).
    pub b: f64,
}

impl TrussParams {
    pub fn new(
        theta: f64,
        xi: f64,
        gamma: f64,
        omega: f64,
        alpha2: f64,
        alpha3: f64,
        b: f64,
    ) -> Result<Self> {
        let all = [theta, xi, gamma, omega, alpha2, alpha3, b];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if !(theta > 0.0) {
            return Err(Error::InvalidParams(format!("theta must be positive, got {theta}")));
        }
        if !(xi >= 0.0) {
            return Err(Error::InvalidParams(format!("xi must be non-negative, got {xi}")));
        }
        if !(alpha2 > 0.0) {
            return Err(Error::InvalidParams(format!("alpha2 must be positive, got {alpha2}")));
        }
        if !(alpha3 > 0.0) {
            return Err(Error::InvalidParams(format!("alpha3 must be positive, got {alpha3}")));
        }
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::InvalidParams(format!("b must lie in (0, 1), got {b}")));
        }
        if !(omega >= 0.0) {
            return Err(Error::InvalidParams(format!("Omega must be non-negative, got {omega}")));
        }
        Ok(Self { theta, xi, gamma, omega, alpha2, alpha3, b })
    }

    /// Nondimensionalize a dimensional setup. `t` is the bar temperature (K),
    /// `p0` the force amplitude (N), `omega` the forcing frequency (rad/s).
    /// Material constants are in MPa and converted internally.
    pub fn from_dimensional(
        mat: &MaterialProperties,
        geom: &TrussGeometry,
        t: f64,
        p0: f64,
        omega: f64,
    ) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::InvalidParams(format!("temperature must be positive, got {t}")));
        }
        if !(omega >= 0.0) || !p0.is_finite() {
            return Err(Error::InvalidParams(
                "forcing amplitude must be finite and frequency non-negative".into(),
            ));
        }
        // omega0^2 = 2 A a1 T_M / (m L0), with a1 in Pa/K
        let a1_pa = mat.a1 * 1e6;
        let omega0_sq = 2.0 * geom.area * a1_pa * mat.t_m / (geom.mass * geom.l0);
        let omega0 = omega0_sq.sqrt();
        Self::new(
            t / mat.t_m,
            geom.damping / (geom.mass * omega0),
            p0 / (geom.mass * geom.l0 * omega0_sq),
            omega / omega0,
            mat.a2 / (mat.a1 * mat.t_m),
            mat.a3 / (mat.a1 * mat.t_m),
            geom.phi0.cos(),
        )
    }

    /// Nondimensional bar stress at strain `eps` (Horner over eps^2).
    fn sigma(&self, eps: f64) -> f64 {
        ((self.alpha3 * eps * eps - self.alpha2) * eps * eps + (self.theta - 1.0)) * eps
    }

    /// Restoring acceleration r(x): the full brace of the equation of motion
    /// multiplied by x. Odd in x; zero exactly where the bar stress vanishes.
    pub fn restoring_term(&self, x: f64) -> f64 {
        let u_len = (x * x + self.b * self.b).sqrt();
        -x * self.sigma(u_len - 1.0) / u_len
    }

    /// Forcing term gamma sin(Omega tau).
    pub fn forcing(&self, tau: f64) -> f64 {
        self.gamma * (self.omega * tau).sin()
    }

    /// Right-hand side of the first-order system; `u` is the control input
    /// (unit input gain) and `include_forcing` gates the periodic excitation.
    pub fn derivative(&self, state: &SimState, u: f64, include_forcing: bool) -> (f64, f64) {
        let mut ydot = -self.xi * state.y + self.restoring_term(state.x) + u;
        if include_forcing {
            ydot += self.forcing(state.tau);
        }
        (state.y, ydot)
    }

    /// All equilibria in [-2, 2], found by sign-change bracketing at 1e-4
    /// resolution refined by bisection, with stability from the sign of the
    /// finite-difference slope of the restoring acceleration (negative
    /// slope restores, hence stable).
    ///
    /// Fails with [`Error::EvenRootCount`] when the scan brackets an even
    /// number of roots: the restoring term is odd, so a correct scan always
    /// finds an odd count, and an even one means a tangency slipped through.
    pub fn equilibria(&self) -> Result<Vec<Equilibrium>> {
        const LO: f64 = -2.0;
        const HI: f64 = 2.0;
        const STEPS: usize = 40_000;
        let f = |x: f64| self.restoring_term(x);
        let mut roots: Vec<f64> = Vec::new();
        let grid = |i: usize| LO + (HI - LO) * i as f64 / STEPS as f64;
        let mut prev_x = grid(0);
        let mut prev_f = f(prev_x);
        for i in 1..=STEPS {
            let cur_x = grid(i);
            let cur_f = f(cur_x);
            if prev_f == 0.0 {
                roots.push(prev_x);
            } else if prev_f.signum() != cur_f.signum() && cur_f != 0.0 {
                roots.push(bisect(&f, prev_x, cur_x));
            }
            prev_x = cur_x;
            prev_f = cur_f;
        }
        if f(prev_x) == 0.0 {
            roots.push(prev_x);
        }
        if roots.len() % 2 == 0 {
            return Err(Error::EvenRootCount { count: roots.len() });
        }
        let h = 1e-6;
        Ok(roots
            .into_iter()
            .map(|x| {
                let slope = (f(x + h) - f(x - h)) / (2.0 * h);
                Equilibrium { x, stable: slope < 0.0 }
            })
            .collect())
    }
}

/// One equilibrium configuration of the truss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    /// Apex position x*.
    pub x: f64,
    /// True when the restoring slope at x* is negative.
    pub stable: bool,
}

fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..100 {
        if hi - lo < 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if flo.signum() == fmid.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Instantaneous nondimensional state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState {
    /// Displacement ratio X/L0.
    pub x: f64,
    /// Velocity dx/dtau.
    pub y: f64,
    /// Nondimensional time.
    pub tau: f64,
}

impl SimState {
    pub fn new(x: f64, y: f64, tau: f64) -> Self {
        Self { x, y, tau }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    /// Parameters of the chaotic low-temperature study: theta = 0.69,
    /// xi = 0.05, gamma = 0.020, Omega = 0.5, alpha2 = 1.240e2,
    /// alpha3 = 1.450e4, b = 0.866.
    fn reference_params() -> TrussParams {
        TrussParams::new(0.69, 0.05, 0.020, 0.5, 124.0, 14500.0, 0.866).unwrap()
    }

    /// Brace expansion of the equation of motion, evaluated bracket by
    /// bracket exactly as written out in powers of (x^2 + b^2). Returns the
    /// value and the sum of absolute bracket contributions, which measures
    /// the cancellation the expanded form suffers.
    fn restoring_brace_oracle(p: &TrussParams, x: f64) -> (f64, f64) {
        let u2 = x * x + p.b * p.b;
        let u = u2.sqrt();
        let th = p.theta - 1.0;
        let terms = [
            -(th - 3.0 * p.alpha2 + 5.0 * p.alpha3),
            (th - p.alpha2 + p.alpha3) / u,
            -(3.0 * p.alpha2 - 10.0 * p.alpha3) * u,
            (p.alpha2 - 10.0 * p.alpha3) * u2,
            5.0 * p.alpha3 * u2 * u,
            -p.alpha3 * u2 * u2,
        ];
        let sum: f64 = terms.iter().sum();
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        (x * sum, x.abs() * scale)
    }

    #[test]
    fn restoring_vanishes_at_origin() {
        assert_eq!(reference_params().restoring_term(0.0), 0.0);
    }

    #[test]
    fn restoring_matches_brace_expansion_at_random_states() {
        let p = reference_params();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let x: f64 = rng.gen_range(-1.5..1.5);
            let got = p.restoring_term(x);
            let (oracle, scale) = restoring_brace_oracle(&p, x);
            // 1e-12 relative to the summed bracket magnitudes: the brackets
            // cancel from ~1e5 down to O(1), so that is the conditioning of
            // the expanded route
            assert!(
                (got - oracle).abs() <= 1e-12 * (1.0 + scale),
                "x={x}: {got} vs {oracle} (scale {scale})"
            );
        }
    }

    #[test]
    fn derivative_trivial_points() {
        let mut p = reference_params();
        let (xd, yd) = p.derivative(&SimState::new(0.0, 0.0, 0.0), 0.0, true);
        assert_eq!((xd, yd), (0.0, 0.0));

        p.xi = 0.05;
        let (xd, yd) = p.derivative(&SimState::new(0.0, 1.0, 0.0), 0.0, true);
        assert_eq!(xd, 1.0);
        assert!((yd - (-0.05)).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_term_by_term_reevaluation() {
        let p = reference_params();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let state = SimState::new(
                rng.gen_range(-1.2..1.2),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..100.0),
            );
            let (xd, yd) = p.derivative(&state, 0.0, true);
            assert_eq!(xd, state.y);
            let (brace, scale) = restoring_brace_oracle(&p, state.x);
            let oracle = p.gamma * (p.omega * state.tau).sin() - p.xi * state.y + brace;
            assert!(
                (yd - oracle).abs() <= 1e-12 * (1.0 + scale),
                "state={state:?}: {yd} vs {oracle}"
            );
        }
    }

    #[test]
    fn derivative_at_reference_point_against_frozen_oracle() {
        // independent high-precision evaluation of the right-hand side at
        // (x, y, tau) = (0.3, 0.1, 1.0) with the reference parameters
        let p = reference_params();
        let (_, yd) = p.derivative(&SimState::new(0.3, 0.1, 1.0), 0.0, true);
        let u = (0.09f64 + 0.866 * 0.866).sqrt();
        let e = u - 1.0;
        let sigma = (0.69 - 1.0) * e - 124.0 * e.powi(3) + 14500.0 * e.powi(5);
        let expected = 0.020 * 0.5f64.sin() - 0.05 * 0.1 - 0.3 * sigma / u;
        assert!((yd - expected).abs() < 1e-13, "{yd} vs {expected}");
    }

    #[test]
    fn control_input_enters_additively_with_unit_gain() {
        let p = reference_params();
        let s = SimState::new(0.4, -0.2, 3.0);
        let (_, y0) = p.derivative(&s, 0.0, true);
        let (_, y1) = p.derivative(&s, 0.75, true);
        assert!((y1 - y0 - 0.75).abs() < 1e-15);
    }

    #[test]
    fn equilibria_match_quintic_closed_form() {
        let p = reference_params();
        let eqs = p.equilibria().unwrap();
        assert_eq!(eqs.len(), 7, "{eqs:?}");

        // independent oracle: equilibria away from x = 0 are where the bar
        // stress vanishes, i.e. alpha3 e^4 - alpha2 e^2 + (theta-1) = 0,
        // solved in closed form and mapped back through x^2 = (1+e)^2 - b^2
        let disc = (p.alpha2 * p.alpha2 - 4.0 * p.alpha3 * (p.theta - 1.0)).sqrt();
        let e2 = (p.alpha2 + disc) / (2.0 * p.alpha3);
        let e = e2.sqrt();
        let x_outer = ((1.0 + e) * (1.0 + e) - p.b * p.b).sqrt();
        let x_inner = ((1.0 - e) * (1.0 - e) - p.b * p.b).sqrt();
        let x_zero_strain = (1.0 - p.b * p.b).sqrt();

        let expect = [
            (-x_outer, true),
            (-x_zero_strain, false),
            (-x_inner, true),
            (0.0, false),
            (x_inner, true),
            (x_zero_strain, false),
            (x_outer, true),
        ];
        for (eq, (x, stable)) in eqs.iter().zip(expect.iter()) {
            assert!((eq.x - x).abs() < 1e-8, "{} vs {}", eq.x, x);
            assert_eq!(eq.stable, *stable, "at x* = {x}");
        }

        // frozen values from the closed form
        assert!((x_outer - 0.6828428134368851).abs() < 1e-12);
        assert!((x_inner - 0.23443766710772418).abs() < 1e-12);
        assert!((x_zero_strain - 0.5000439980641704).abs() < 1e-12);
    }

    #[test]
    fn stable_equilibrium_sits_near_the_study_setpoint() {
        let eqs = reference_params().equilibria().unwrap();
        let nearest = eqs
            .iter()
            .min_by(|a, b| {
                (a.x - 0.68).abs().partial_cmp(&(b.x - 0.68).abs()).unwrap()
            })
            .unwrap();
        assert!(nearest.stable);
        assert!((nearest.x - 0.68).abs() < 0.005, "x* = {}", nearest.x);
        // and the restoring term vanishes there
        assert!(reference_params().restoring_term(nearest.x).abs() < 1e-9);
    }

    #[test]
    fn equilibria_set_is_symmetric() {
        let eqs = reference_params().equilibria().unwrap();
        for eq in &eqs {
            let mirrored = eqs.iter().any(|other| (other.x + eq.x).abs() < 1e-8);
            assert!(mirrored, "no mirror for {}", eq.x);
        }
    }

    #[test]
    fn nondimensionalize_reproduces_study_ratios() {
        let mat = MaterialProperties::cu_zn_al_ni();
        let geom = TrussGeometry::new(1.0, 30f64.to_radians(), 1e-4, 2.0, 100.0).unwrap();
        let p = TrussParams::from_dimensional(&mat, &geom, 288.0 * 0.69, 50.0, 300.0).unwrap();

        assert!((p.alpha2 - 124.0).abs() / 124.0 < 5e-3, "alpha2 = {}", p.alpha2);
        assert!((p.alpha3 - 14500.0).abs() / 14500.0 < 5e-3, "alpha3 = {}", p.alpha3);
        assert!((p.alpha2 - 123.94869214223684).abs() < 1e-9);
        assert!((p.alpha3 - 14504.91654298339).abs() < 1e-9);
        assert!((p.b - 0.866).abs() < 1e-3);
        assert!((p.theta - 0.69).abs() < 1e-12);

        // omega0^2 = 2*1e-4*523.29e6*288/(2*1) and the remaining ratios
        let omega0_sq: f64 = 2.0 * 1e-4 * 523.29e6 * 288.0 / 2.0;
        let omega0 = omega0_sq.sqrt();
        assert!((p.omega - 300.0 / omega0).abs() < 1e-12);
        assert!((p.gamma - 50.0 / (2.0 * omega0_sq)).abs() < 1e-18);
        assert!((p.xi - 100.0 / (2.0 * omega0)).abs() < 1e-12);
    }

    #[test]
    fn nondimensionalize_theta_is_one_at_martensite_temperature() {
        let mat = MaterialProperties::cu_zn_al_ni();
        let geom = TrussGeometry::new(0.5, 0.6, 2e-4, 1.0, 0.0).unwrap();
        let p = TrussParams::from_dimensional(&mat, &geom, mat.t_m, 0.0, 0.0).unwrap();
        assert_eq!(p.theta, 1.0);
        assert_eq!(p.gamma, 0.0);
        assert_eq!(p.xi, 0.0);
    }

    #[test]
    fn params_validation_rejects_bad_values() {
        assert!(TrussParams::new(0.0, 0.1, 0.0, 1.0, 1.0, 1.0, 0.5).is_err());
        assert!(TrussParams::new(1.0, -0.1, 0.0, 1.0, 1.0, 1.0, 0.5).is_err());
        assert!(TrussParams::new(1.0, 0.1, 0.0, 1.0, 0.0, 1.0, 0.5).is_err());
        assert!(TrussParams::new(1.0, 0.1, 0.0, 1.0, 1.0, -1.0, 0.5).is_err());
        assert!(TrussParams::new(1.0, 0.1, 0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(TrussParams::new(1.0, 0.1, 0.0, -1.0, 1.0, 1.0, 0.5).is_err());
        assert!(TrussParams::new(1.0, 0.1, f64::NAN, 1.0, 1.0, 1.0, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn restoring_is_odd(x in -1.9f64..1.9) {
            let p = reference_params();
            let plus = p.restoring_term(x);
            let minus = p.restoring_term(-x);
            prop_assert!((plus + minus).abs() <= 1e-12 * plus.abs().max(1.0));
        }
    }

    proptest! {
        #[test]
        fn equilibria_odd_count_and_zero_root(
            theta in 0.3f64..1.4,
            alpha2 in 50.0f64..300.0,
            alpha3 in 5_000.0f64..30_000.0,
            b in 0.3f64..0.95,
        ) {
            let p = TrussParams::new(theta, 0.0, 0.0, 1.0, alpha2, alpha3, b).unwrap();
            let eqs = p.equilibria().unwrap();
            prop_assert!(eqs.len() % 2 == 1);
            prop_assert!(eqs.iter().any(|e| e.x.abs() < 1e-9));
        }
    }
}
