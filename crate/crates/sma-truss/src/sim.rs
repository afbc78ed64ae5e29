//! Fixed-step RK4 scenario engine with dual-rate sampling.
//!
//! The plant integrates at `plant_rate` samples per unit tau while the
//! controller recomputes `u` at the slower `control_rate`, holding it
//! constant in between (zero-order hold). The periodic excitation always
//! acts on the plant and advances continuously through the RK4 substeps;
//! the controller never sees it. For the study rates 1000*Omega/pi and
//! 200*Omega/pi the hold spans exactly five plant steps.

use crate::control::{Controller, ControllerConfig, DesiredState};
use crate::dynamics::{SimState, TrussParams};
use crate::fuzzy::{FuzzyCompensator, MembershipPartition};
use crate::{Error, Result};

/// Distance below which two Poincare points count as the same point.
pub const POINCARE_DISTINCT_TOL: f64 = 1e-3;

/// Absolute allowance on the convergence-box check. The box is an
/// asymptotic claim; with a perfect model the estimated disturbance bound
/// is exactly zero while the integrated error stalls at a rounding-level
/// micro-cycle (~1e-14), which must still count as inside.
pub const BOX_TOLERANCE: f64 = 1e-12;

/// Controller half of a scenario: the law itself, the setpoint it tracks,
/// and the fuzzy compensator it may carry.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerSetup {
    pub config: ControllerConfig,
    pub setpoint: DesiredState,
    pub partition: MembershipPartition,
    /// Adaptation gain phi; zero keeps the consequent table static.
    pub learning_rate: f64,
    pub consequent_limit: f64,
}

/// A complete simulation request.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: TrussParams,
    /// None runs the uncontrolled plant (u = 0).
    pub controller: Option<ControllerSetup>,
    pub x0: f64,
    pub y0: f64,
    pub duration: f64,
    /// Plant samples per unit tau.
    pub plant_rate: f64,
    /// Control updates per unit tau; must divide the plant rate.
    pub control_rate: f64,
    /// Leading fraction of the run excluded from steady-state metrics.
    pub transient_fraction: f64,
    /// Abort threshold on |x|.
    pub blow_up_limit: f64,
}

impl Scenario {
    /// The study sampling rates: 1000*Omega/pi for the plant and
    /// 200*Omega/pi for the controller, i.e. steps pi/(1000 Omega) and
    /// pi/(200 Omega) — 2000 and 400 samples per forcing period.
    pub fn study_rates(omega: f64) -> (f64, f64) {
        let plant = 1000.0 * omega / std::f64::consts::PI;
        (plant, plant / 5.0)
    }

    fn validate(&self) -> Result<(usize, usize)> {
        if !(self.duration > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        if !(self.plant_rate > 0.0) || !(self.control_rate > 0.0) {
            return Err(Error::InvalidScenario("sampling rates must be positive".into()));
        }
        let ratio = self.plant_rate / self.control_rate;
        let rounded = ratio.round();
        if rounded < 1.0 || (ratio - rounded).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidScenario(format!(
                "plant rate must be an integer multiple of the control rate, got ratio {ratio}"
            )));
        }
        if !(0.0..1.0).contains(&self.transient_fraction) {
            return Err(Error::InvalidScenario(format!(
                "transient fraction must lie in [0, 1), got {}",
                self.transient_fraction
            )));
        }
        if !(self.blow_up_limit > 0.0) {
            return Err(Error::InvalidScenario("blow-up limit must be positive".into()));
        }
        if !self.x0.is_finite() || !self.y0.is_finite() || self.x0.abs() > self.blow_up_limit {
            return Err(Error::InvalidScenario(format!(
                "initial state ({}, {}) is outside the guard",
                self.x0, self.y0
            )));
        }
        let steps = (self.duration * self.plant_rate).round();
        if steps < 1.0 || steps > 5e8 {
            return Err(Error::InvalidScenario(format!(
                "{steps} plant steps is outside the supported range"
            )));
        }
        Ok((steps as usize, rounded as usize))
    }
}

/// One classical RK4 update of the state under the field `f`; any held
/// control input is already baked into `f`, while time-dependent terms
/// advance through the substeps.
pub fn rk4_step<F>(state: &SimState, dt: f64, f: F) -> SimState
where
    F: Fn(&SimState) -> (f64, f64),
{
    let eval = |x: f64, y: f64, tau: f64| f(&SimState::new(x, y, tau));
    let half = 0.5 * dt;
    let (k1x, k1y) = eval(state.x, state.y, state.tau);
    let (k2x, k2y) = eval(state.x + half * k1x, state.y + half * k1y, state.tau + half);
    let (k3x, k3y) = eval(state.x + half * k2x, state.y + half * k2y, state.tau + half);
    let (k4x, k4y) = eval(state.x + dt * k3x, state.y + dt * k3y, state.tau + dt);
    SimState {
        x: state.x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        y: state.y + dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
        tau: state.tau + dt,
    }
}

/// State recorded at one control update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSample {
    pub tau: f64,
    pub x: f64,
    pub y: f64,
    /// Combined error measure fed to the fuzzy system.
    pub s: f64,
    pub u: f64,
    pub d_hat: f64,
    /// Disturbance actually acting at this instant: the excitation plus the
    /// model-estimate error (known here because the engine owns the truth).
    pub d_true: f64,
}

/// Stroboscopic sample at a forcing-phase-zero instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincarePoint {
    pub tau: f64,
    pub x: f64,
    pub y: f64,
}

/// Steady-state and whole-run summary statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    /// Start of the steady-state window.
    pub steady_start_tau: f64,
    /// Sign changes of x within the steady window.
    pub snap_through_count: usize,
    /// Sign changes of x over the whole run.
    pub snap_through_total: usize,
    pub poincare_points: usize,
    /// Poincare points pairwise farther apart than [`POINCARE_DISTINCT_TOL`].
    pub poincare_distinct: usize,
    /// Controller bandwidth (controlled runs only).
    pub lambda: Option<f64>,
    /// Steady-state RMS of the tracking error.
    pub rms_error: Option<f64>,
    pub max_abs_error: Option<f64>,
    pub max_abs_error_rate: Option<f64>,
    /// Max steady-state |d_hat - d_true| over control updates.
    pub eps_hat: Option<f64>,
    /// Convergence box [|e| bound, |e'| bound] at eps_hat.
    pub box_bounds: Option<[f64; 2]>,
    /// Whether the steady-state errors sit inside the box.
    pub inside_box: Option<bool>,
    /// Earliest tau after which the error never leaves the box.
    pub box_entry_tau: Option<f64>,
}

/// Full time series plus derived diagnostics. Error-related columns are NaN
/// for uncontrolled runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub tau: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub d_hat: Vec<f64>,
    pub s: Vec<f64>,
    pub xtilde: Vec<f64>,
    pub xtilde_dot: Vec<f64>,
    pub control_samples: Vec<ControlSample>,
    pub poincare: Vec<PoincarePoint>,
    pub metrics: Metrics,
}

/// Integrate a scenario to completion.
pub fn run_scenario(sc: &Scenario) -> Result<ScenarioResult> {
    let (n_steps, ratio) = sc.validate()?;
    let dt = 1.0 / sc.plant_rate;
    let control_dt = dt * ratio as f64;

    let mut controller: Option<(Controller, DesiredState, Option<FuzzyCompensator>)> =
        match &sc.controller {
            Some(setup) => {
                let ctrl = Controller::new(setup.config)?;
                let comp = if setup.config.fuzzy_enabled {
                    Some(FuzzyCompensator::new(
                        setup.partition.clone(),
                        setup.learning_rate,
                        setup.consequent_limit,
                    )?)
                } else {
                    None
                };
                Some((ctrl, setup.setpoint, comp))
            }
            None => None,
        };

    let n_rows = n_steps + 1;
    let mut result = ScenarioResult {
        tau: Vec::with_capacity(n_rows),
        x: Vec::with_capacity(n_rows),
        y: Vec::with_capacity(n_rows),
        u: Vec::with_capacity(n_rows),
        d_hat: Vec::with_capacity(n_rows),
        s: Vec::with_capacity(n_rows),
        xtilde: Vec::with_capacity(n_rows),
        xtilde_dot: Vec::with_capacity(n_rows),
        control_samples: Vec::new(),
        poincare: Vec::new(),
        metrics: Metrics {
            steady_start_tau: sc.duration * sc.transient_fraction,
            snap_through_count: 0,
            snap_through_total: 0,
            poincare_points: 0,
            poincare_distinct: 0,
            lambda: sc.controller.as_ref().map(|c| c.config.lambda),
            rms_error: None,
            max_abs_error: None,
            max_abs_error_rate: None,
            eps_hat: None,
            box_bounds: None,
            inside_box: None,
            box_entry_tau: None,
        },
    };

    let mut state = SimState::new(sc.x0, sc.y0, 0.0);
    let mut u_hold = 0.0;
    let mut d_hat_hold = 0.0;

    let error_ref = sc.controller.as_ref().map(|setup| {
        let gains = crate::control::gain_vector(setup.config.order, setup.config.lambda);
        (setup.setpoint, gains[0], gains[1])
    });
    let record = |result: &mut ScenarioResult, state: &SimState, u: f64, d_hat: f64| {
        result.tau.push(state.tau);
        result.x.push(state.x);
        result.y.push(state.y);
        result.u.push(u);
        result.d_hat.push(d_hat);
        match &error_ref {
            Some((setpoint, k0, k1)) => {
                let e = state.x - setpoint.x;
                let edot = state.y - setpoint.xdot;
                result.s.push(k0 * e + k1 * edot);
                result.xtilde.push(e);
                result.xtilde_dot.push(edot);
            }
            None => {
                result.s.push(f64::NAN);
                result.xtilde.push(f64::NAN);
                result.xtilde_dot.push(f64::NAN);
            }
        }
    };

    for i in 0..n_steps {
        if let Some((ctrl, setpoint, comp)) = controller.as_mut() {
            if i % ratio == 0 {
                let out = ctrl.step(&state, setpoint, comp.as_mut(), control_dt);
                u_hold = out.u;
                d_hat_hold = out.d_hat;
                let d_true = {
                    let (_, f_plant) = sc.params.derivative(&state, 0.0, true);
                    f_plant - ctrl.model_estimate(&state)
                };
                result.control_samples.push(ControlSample {
                    tau: state.tau,
                    x: state.x,
                    y: state.y,
                    s: out.s,
                    u: out.u,
                    d_hat: out.d_hat,
                    d_true,
                });
            }
        }
        if i == 0 {
            record(&mut result, &state, u_hold, d_hat_hold);
        }
        state = rk4_step(&state, dt, |s| sc.params.derivative(s, u_hold, true));
        if !state.x.is_finite() || !state.y.is_finite() || state.x.abs() > sc.blow_up_limit {
            return Err(Error::BlowUp {
                tau: state.tau,
                x: state.x,
                limit: sc.blow_up_limit,
            });
        }
        record(&mut result, &state, u_hold, d_hat_hold);
    }

    result.poincare = poincare_section(&result, sc.params.omega);
    compute_metrics(sc, &mut result);
    Ok(result)
}

/// Stroboscopic section of the result at forcing phase zero, i.e. at
/// tau_k = k 2 pi / Omega, k = 1, 2, ..., linearly interpolated between the
/// bracketing plant samples. Empty when the run is shorter than one period
/// or the forcing frequency is zero.
pub fn poincare_section(result: &ScenarioResult, omega: f64) -> Vec<PoincarePoint> {
    let mut points = Vec::new();
    if omega <= 0.0 || result.tau.len() < 2 {
        return points;
    }
    let period = 2.0 * std::f64::consts::PI / omega;
    let end = *result.tau.last().unwrap();
    let mut idx = 0;
    let mut k = 1usize;
    loop {
        let target = k as f64 * period;
        if target > end {
            break;
        }
        while result.tau[idx + 1] < target {
            idx += 1;
        }
        let (t0, t1) = (result.tau[idx], result.tau[idx + 1]);
        let w = (target - t0) / (t1 - t0);
        points.push(PoincarePoint {
            tau: target,
            x: result.x[idx] + w * (result.x[idx + 1] - result.x[idx]),
            y: result.y[idx] + w * (result.y[idx + 1] - result.y[idx]),
        });
        k += 1;
    }
    points
}

fn count_sign_changes(xs: &[f64]) -> usize {
    xs.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
}

fn compute_metrics(sc: &Scenario, result: &mut ScenarioResult) {
    let steady_start = result.metrics.steady_start_tau;
    let steady_from = result.tau.partition_point(|&t| t < steady_start);

    result.metrics.snap_through_total = count_sign_changes(&result.x);
    result.metrics.snap_through_count = count_sign_changes(&result.x[steady_from..]);
    result.metrics.poincare_points = result.poincare.len();
    result.metrics.poincare_distinct = {
        let mut kept: Vec<(f64, f64)> = Vec::new();
        for p in &result.poincare {
            let tol2 = POINCARE_DISTINCT_TOL * POINCARE_DISTINCT_TOL;
            if kept
                .iter()
                .all(|q| (p.x - q.0).powi(2) + (p.y - q.1).powi(2) > tol2)
            {
                kept.push((p.x, p.y));
            }
        }
        kept.len()
    };

    let Some(setup) = &sc.controller else {
        return;
    };

    let steady_err = &result.xtilde[steady_from..];
    let steady_rate = &result.xtilde_dot[steady_from..];
    let rms = (steady_err.iter().map(|e| e * e).sum::<f64>() / steady_err.len() as f64).sqrt();
    let max_err = steady_err.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let max_rate = steady_rate.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    result.metrics.rms_error = Some(rms);
    result.metrics.max_abs_error = Some(max_err);
    result.metrics.max_abs_error_rate = Some(max_rate);

    let eps_hat = result
        .control_samples
        .iter()
        .filter(|cs| cs.tau >= steady_start)
        .fold(0.0f64, |m, cs| m.max((cs.d_hat - cs.d_true).abs()));
    result.metrics.eps_hat = Some(eps_hat);

    let bounds = crate::control::convergence_box(setup.config.order, setup.config.lambda, eps_hat);
    let box_bounds = [bounds[0], bounds[1]];
    result.metrics.box_bounds = Some(box_bounds);
    result.metrics.inside_box = Some(
        max_err <= box_bounds[0] + BOX_TOLERANCE && max_rate <= box_bounds[1] + BOX_TOLERANCE,
    );

    // earliest tau after which the trajectory never leaves the box again
    let mut last_violation: Option<usize> = None;
    for i in (0..result.tau.len()).rev() {
        if result.xtilde[i].abs() > box_bounds[0] + BOX_TOLERANCE
            || result.xtilde_dot[i].abs() > box_bounds[1] + BOX_TOLERANCE
        {
            last_violation = Some(i);
            break;
        }
    }
    result.metrics.box_entry_tau = match last_violation {
        None => Some(result.tau[0]),
        Some(i) if i + 1 < result.tau.len() => Some(result.tau[i + 1]),
        Some(_) => None,
    };
}
