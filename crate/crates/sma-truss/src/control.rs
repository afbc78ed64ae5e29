//! Feedback-linearization control of the truss, with optional TSK fuzzy
//! compensation of unmodeled dynamics and disturbances.
//!
//! The conventional law cancels the estimated plant dynamics and imposes
//! linear error dynamics whose characteristic polynomial is (p + lambda)^n,
//! i.e. Hurwitz by construction:
//!
//! ```text
//! u = -f_hat + xd^(n) - k0 e - k1 e' - ...,   k_i = C(n, i) lambda^(n-i)
//! ```
//!
//! The fuzzy variant subtracts an inferred compensation `d_hat(s)` driven by
//! the combined error measure `s = sum_i k_i e^(i)`. When the inference
//! approximates the acting disturbance within `epsilon`, the tracking error
//! converges exponentially to the box `|e^(i)| <= zeta_i lambda^(i-n) epsilon`
//! computed by [`convergence_box`].

use crate::dynamics::{SimState, TrussParams};
use crate::fuzzy::FuzzyCompensator;
use crate::{Error, Result};

/// Binomial coefficient C(n, k) in f64 (exact for the small n used here).
fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut num = 1.0;
    for i in 0..k {
        num = num * (n - i) as f64 / (i + 1) as f64;
    }
    num.round()
}

/// Gain vector k with k_i = C(n, i) lambda^(n-i) for i = 0..n-1, which makes
/// p^n + k_{n-1} p^{n-1} + ... + k_0 = (p + lambda)^n.
pub fn gain_vector(n: usize, lambda: f64) -> Vec<f64> {
    assert!(n >= 1, "system order must be at least 1");
    assert!(lambda > 0.0, "lambda must be strictly positive");
    (0..n)
        .map(|i| binomial(n, i) * lambda.powi((n - i) as i32))
        .collect()
}

/// Tracking error and its derivatives (e, e', ..., e^(n-1)).
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingError {
    values: Vec<f64>,
}

impl TrackingError {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(
                "tracking error needs at least one finite entry".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Combined tracking error measure s = sum_i k_i e^(i).
pub fn combined_error(gains: &[f64], error: &TrackingError) -> f64 {
    assert_eq!(gains.len(), error.values.len(), "gain/error dimension mismatch");
    gains.iter().zip(&error.values).map(|(k, e)| k * e).sum()
}

/// Coefficients of the exponential-convergence bounds: zeta_0 = 1 and
/// zeta_i = 1 + sum_{j<i} C(i, j) zeta_j.
pub fn zeta_coefficients(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    let mut zeta = Vec::with_capacity(n);
    zeta.push(1.0);
    for i in 1..n {
        let sum: f64 = (0..i).map(|j| binomial(i, j) * zeta[j]).sum();
        zeta.push(1.0 + sum);
    }
    zeta
}

/// Per-derivative bounds of the convergence region:
/// bound_i = zeta_i lambda^(i-n) epsilon.
pub fn convergence_box(n: usize, lambda: f64, epsilon: f64) -> Vec<f64> {
    assert!(lambda > 0.0, "lambda must be strictly positive");
    assert!(epsilon >= 0.0, "epsilon must be non-negative");
    zeta_coefficients(n)
        .iter()
        .enumerate()
        .map(|(i, z)| z * lambda.powi(i as i32 - n as i32) * epsilon)
        .collect()
}

/// Plant parameters as the controller believes them. Only the material
/// ratios are detuned in the reference study; theta, xi, and b are taken as
/// exact, and the periodic excitation is never part of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelEstimates {
    pub theta: f64,
    pub xi: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub b: f64,
}

impl ModelEstimates {
    /// Estimates equal to the true plant parameters (perfect model).
    pub fn exact(params: &TrussParams) -> Self {
        Self {
            theta: params.theta,
            xi: params.xi,
            alpha2: params.alpha2,
            alpha3: params.alpha3,
            b: params.b,
        }
    }

    fn to_params(self) -> Result<TrussParams> {
        TrussParams::new(self.theta, self.xi, 0.0, 0.0, self.alpha2, self.alpha3, self.b)
    }
}

/// Controller configuration: order, bandwidth, model estimates, and whether
/// the fuzzy compensation term is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    /// System order n (2 for the truss).
    pub order: usize,
    /// Bandwidth lambda of the imposed error dynamics.
    pub lambda: f64,
    pub estimates: ModelEstimates,
    pub fuzzy_enabled: bool,
}

/// Desired trajectory sample: position, velocity, acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesiredState {
    pub x: f64,
    pub xdot: f64,
    pub xddot: f64,
}

impl DesiredState {
    /// Constant setpoint (zero desired velocity and acceleration).
    pub fn setpoint(x: f64) -> Self {
        Self { x, xdot: 0.0, xddot: 0.0 }
    }
}

/// What one control update produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub u: f64,
    /// Combined error measure at the sampling instant.
    pub s: f64,
    /// Fuzzy compensation included in u (zero when disabled).
    pub d_hat: f64,
}

/// Feedback-linearization controller for the second-order truss dynamics.
#[derive(Debug, Clone)]
pub struct Controller {
    config: ControllerConfig,
    gains: Vec<f64>,
    model: TrussParams,
}

impl Controller {
    pub fn new(config: ControllerConfig) -> Result<Self> {
        if config.order != 2 {
            return Err(Error::InvalidParams(format!(
                "the truss control law is second-order, got n = {}",
                config.order
            )));
        }
        if !(config.lambda > 0.0) {
            return Err(Error::InvalidParams(format!(
                "lambda must be strictly positive, got {}",
                config.lambda
            )));
        }
        let model = config.estimates.to_params()?;
        let gains = gain_vector(config.order, config.lambda);
        Ok(Self { config, gains, model })
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.config
    }

    /// Gains [k0, k1].
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    /// s = k0 (x - xd) + k1 (y - xd').
    pub fn combined_error_at(&self, state: &SimState, xd: &DesiredState) -> f64 {
        self.gains[0] * (state.x - xd.x) + self.gains[1] * (state.y - xd.xdot)
    }

    /// Model estimate f_hat = -xi_hat y + r_hat(x); no forcing term, since
    /// the excitation is treated as an unknown external disturbance.
    pub fn model_estimate(&self, state: &SimState) -> f64 {
        let (_, ydot) = self.model.derivative(state, 0.0, false);
        ydot
    }

    /// Conventional feedback linearization:
    /// u = -f_hat + xd'' - k0 (x - xd) - k1 (y - xd').
    pub fn control_fl(&self, state: &SimState, xd: &DesiredState) -> f64 {
        -self.model_estimate(state) + xd.xddot
            - self.gains[0] * (state.x - xd.x)
            - self.gains[1] * (state.y - xd.xdot)
    }

    /// Fuzzy-compensated law u = control_fl - d_hat(s). The consequents are
    /// updated once, after u is computed, using the control interval `dtau`.
    pub fn control_fuzzy_fl(
        &self,
        state: &SimState,
        xd: &DesiredState,
        compensator: &mut FuzzyCompensator,
        dtau: f64,
    ) -> f64 {
        self.step(state, xd, Some(compensator), dtau).u
    }

    /// One control update as the engine sees it. With fuzzy disabled or no
    /// compensator the output matches [`Controller::control_fl`] bit for bit.
    pub fn step(
        &self,
        state: &SimState,
        xd: &DesiredState,
        compensator: Option<&mut FuzzyCompensator>,
        dtau: f64,
    ) -> ControlOutput {
        let s = self.combined_error_at(state, xd);
        let base = self.control_fl(state, xd);
        match compensator {
            Some(comp) if self.config.fuzzy_enabled => {
                let d_hat = comp.infer(s);
                let u = base - d_hat;
                comp.adapt(s, dtau);
                ControlOutput { u, s, d_hat }
            }
            _ => ControlOutput { u: base, s, d_hat: 0.0 },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::MembershipPartition;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn reference_params() -> TrussParams {
        TrussParams::new(0.69, 0.05, 0.020, 0.5, 124.0, 14500.0, 0.866).unwrap()
    }

    fn study_config(fuzzy_enabled: bool) -> ControllerConfig {
        ControllerConfig {
            order: 2,
            lambda: 0.6,
            estimates: ModelEstimates {
                theta: 0.69,
                xi: 0.05,
                alpha2: 100.0,
                alpha3: 11500.0,
                b: 0.866,
            },
            fuzzy_enabled,
        }
    }

    /// Factorial-based binomial, independent of the multiplicative helper.
    fn binom_oracle(n: usize, k: usize) -> f64 {
        fn fact(m: usize) -> u128 {
            (1..=m as u128).product::<u128>().max(1)
        }
        (fact(n) / (fact(k) * fact(n - k))) as f64
    }

    #[test]
    fn gain_vector_examples() {
        let k = gain_vector(2, 0.6);
        assert!((k[0] - 0.36).abs() < 1e-15);
        assert!((k[1] - 1.2).abs() < 1e-15);

        assert_eq!(gain_vector(1, 0.7), vec![0.7]);
        assert_eq!(gain_vector(3, 1.0), vec![1.0, 3.0, 3.0]);
    }

    proptest! {
        #[test]
        fn gains_close_the_loop_as_a_binomial_power(n in 1usize..9, lambda in 0.05f64..4.0) {
            // (p + lambda)^n expanded: coefficient of p^i is C(n,i) lambda^(n-i)
            let k = gain_vector(n, lambda);
            for i in 0..n {
                let expect = binom_oracle(n, i) * lambda.powi((n - i) as i32);
                prop_assert!((k[i] - expect).abs() <= 1e-12 * expect.max(1.0));
            }
        }
    }

    #[test]
    fn combined_error_examples() {
        let k = gain_vector(2, 0.6);
        let zero = TrackingError::new(vec![0.0, 0.0]).unwrap();
        assert_eq!(combined_error(&k, &zero), 0.0);

        let e = TrackingError::new(vec![1.0, 0.0]).unwrap();
        assert!((combined_error(&k, &e) - 0.36).abs() < 1e-15);

        // 0.36*0.1 + 1.2*(-0.03) cancels exactly
        let e = TrackingError::new(vec![0.1, -0.03]).unwrap();
        assert!(combined_error(&k, &e).abs() <= f64::EPSILON);
    }

    #[test]
    fn zeta_examples_and_brute_force_recursion() {
        assert_eq!(zeta_coefficients(1), vec![1.0]);
        assert_eq!(zeta_coefficients(3), vec![1.0, 2.0, 6.0]);
        assert_eq!(zeta_coefficients(4), vec![1.0, 2.0, 6.0, 26.0]);

        // independent brute-force recursion with factorial binomials
        for n in 1..=8 {
            let mut oracle = vec![1.0f64];
            for i in 1..n {
                let mut sum = 0.0;
                for j in 0..i {
                    sum += binom_oracle(i, j) * oracle[j];
                }
                oracle.push(1.0 + sum);
            }
            assert_eq!(zeta_coefficients(n), oracle, "n = {n}");
        }
    }

    #[test]
    fn zeta_matches_bound_propagation() {
        // propagate the proof's chain of bounds numerically: each bound is
        // B_i = eps*lambda^(i-n) + sum_{j<i} C(i,j) lambda^(i-j) B_j, which
        // must equal zeta_i lambda^(i-n) eps
        for n in 1..=4 {
            for lambda in [0.3f64, 0.6, 1.0, 1.7] {
                let eps = 0.01;
                let mut bounds = Vec::new();
                for i in 0..n {
                    let mut b = eps * lambda.powi(i as i32 - n as i32);
                    for (j, bj) in bounds.iter().enumerate().take(i) {
                        b += binom_oracle(i, j) * lambda.powi((i - j) as i32) * bj;
                    }
                    bounds.push(b);
                }
                let box_ = convergence_box(n, lambda, eps);
                for i in 0..n {
                    assert!(
                        (bounds[i] - box_[i]).abs() <= 1e-12 * bounds[i],
                        "n={n} lambda={lambda} i={i}"
                    );
                }
            }
        }
    }

    #[test]
    fn convergence_box_examples() {
        assert_eq!(convergence_box(2, 0.6, 0.0), vec![0.0, 0.0]);

        let b = convergence_box(2, 0.6, 0.01);
        assert!((b[0] - 0.01 / 0.36).abs() < 1e-15);
        assert!((b[1] - 0.02 / 0.6).abs() < 1e-15);

        let b = convergence_box(4, 1.0, 0.25);
        assert_eq!(b, vec![0.25, 0.5, 1.5, 6.5]);
    }

    #[test]
    fn box_scales_with_lambda_powers() {
        // halving lambda at fixed epsilon quadruples the position bound
        let b1 = convergence_box(2, 0.6, 0.01);
        let b2 = convergence_box(2, 0.3, 0.01);
        assert!((b2[0] / b1[0] - 4.0).abs() < 1e-12);
        assert!((b2[1] / b1[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn control_is_zero_at_equilibrium_with_perfect_model() {
        let params = reference_params();
        let ctrl = Controller::new(ControllerConfig {
            order: 2,
            lambda: 0.6,
            estimates: ModelEstimates::exact(&params),
            fuzzy_enabled: false,
        })
        .unwrap();
        let eqs = params.equilibria().unwrap();
        let xstar = eqs.iter().find(|e| e.stable && e.x > 0.5).unwrap().x;
        let u = ctrl.control_fl(&SimState::new(xstar, 0.0, 0.0), &DesiredState::setpoint(xstar));
        assert!(u.abs() < 1e-9, "u = {u}");
    }

    #[test]
    fn residual_equals_true_minus_estimated_restoring() {
        // with theta, xi, b shared, the model error reduces to the restoring
        // difference; check f - f_hat against direct subtraction
        let params = reference_params();
        let ctrl = Controller::new(study_config(false)).unwrap();
        let est = ctrl.config().estimates.to_params().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let state = SimState::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5), 0.0);
            let (_, f_true) = params.derivative(&state, 0.0, false);
            let f_hat = ctrl.model_estimate(&state);
            let direct = params.restoring_term(state.x) - est.restoring_term(state.x);
            assert!(((f_true - f_hat) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_loop_matches_imposed_error_dynamics() {
        // substituting the law into the plant (perfect model, no forcing)
        // leaves e'' + k1 e' + k0 e = 0 at the sampling instant
        let params = TrussParams::new(0.69, 0.05, 0.0, 0.5, 124.0, 14500.0, 0.866).unwrap();
        let ctrl = Controller::new(ControllerConfig {
            order: 2,
            lambda: 0.6,
            estimates: ModelEstimates::exact(&params),
            fuzzy_enabled: false,
        })
        .unwrap();
        let xd = DesiredState::setpoint(0.68);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let state = SimState::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5), 0.0);
            let u = ctrl.control_fl(&state, &xd);
            let (_, ydot) = params.derivative(&state, u, false);
            let e = state.x - xd.x;
            let edot = state.y;
            let residual = ydot + 1.2 * edot + 0.36 * e;
            assert!(residual.abs() < 1e-12, "residual = {residual}");
        }
    }

    #[test]
    fn fuzzy_off_output_bit_matches_conventional_law() {
        let mut comp = FuzzyCompensator::new(
            MembershipPartition::six_center_default(),
            0.0,
            10.0,
        )
        .unwrap();
        let ctrl_fuzzy = Controller::new(study_config(true)).unwrap();
        let ctrl_plain = Controller::new(study_config(false)).unwrap();
        let xd = DesiredState::setpoint(0.68);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let state = SimState::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(0.0..50.0),
            );
            let u_fuzzy = ctrl_fuzzy.control_fuzzy_fl(&state, &xd, &mut comp, 0.01);
            let u_plain = ctrl_plain.control_fl(&state, &xd);
            assert_eq!(u_fuzzy.to_bits(), u_plain.to_bits());
        }
        // the zero table never adapted with phi = 0
        assert!(comp.consequents.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn detuned_estimates_leave_a_nonzero_residual() {
        let params = reference_params();
        let ctrl = Controller::new(study_config(false)).unwrap();
        let state = SimState::new(0.68, 0.0, 0.0);
        let (_, f_true) = params.derivative(&state, 0.0, false);
        let f_hat = ctrl.model_estimate(&state);
        assert!((f_true - f_hat).abs() > 1e-3, "estimates are supposed to be detuned");
    }

    #[test]
    fn controller_validation() {
        let mut cfg = study_config(false);
        cfg.order = 3;
        assert!(Controller::new(cfg).is_err());

        let mut cfg = study_config(false);
        cfg.lambda = 0.0;
        assert!(Controller::new(cfg).is_err());

        let mut cfg = study_config(false);
        cfg.estimates.alpha3 = -1.0;
        assert!(Controller::new(cfg).is_err());
    }
}
