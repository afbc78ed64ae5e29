//! Convergence-bound verification against a finished controlled run.
//!
//! The exponential-convergence result guarantees |e^(i)| <= zeta_i
//! lambda^(i-n) epsilon once transients die out, with epsilon bounding the
//! compensation error |d_hat - d|. The run cannot know epsilon a priori, so
//! it is estimated a posteriori as the steady-state maximum of the recorded
//! residual, and the box claim is then checked self-consistently.

use std::fmt;
use std::path::Path;

use sma_truss::control::convergence_box;
use sma_truss::sim::BOX_TOLERANCE;

use crate::output::{read_metrics, read_timeseries, METRICS_FILE, TIMESERIES_FILE};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub lambda: f64,
    pub eps_hat: f64,
    pub steady_start_tau: f64,
    /// Box bounds for (|xtilde|, |xtilde_dot|).
    pub bounds: [f64; 2],
    /// Observed steady-state maxima.
    pub observed: [f64; 2],
    pub inside: bool,
}

impl BoundsReport {
    /// Per-component slack, bound minus observed (negative = violated).
    pub fn margins(&self) -> [f64; 2] {
        [self.bounds[0] - self.observed[0], self.bounds[1] - self.observed[1]]
    }
}

impl fmt::Display for BoundsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lambda            = {}", self.lambda)?;
        writeln!(f, "eps_hat           = {:.6e}  (max steady |d_hat - d|)", self.eps_hat)?;
        writeln!(f, "steady window     = tau >= {}", self.steady_start_tau)?;
        let names = ["xtilde", "xtilde_dot"];
        for i in 0..2 {
            writeln!(
                f,
                "|{}| <= {:.6e}: observed {:.6e}, margin {:+.6e}",
                names[i],
                self.bounds[i],
                self.observed[i],
                self.margins()[i]
            )?;
        }
        write!(f, "verdict           = {}", if self.inside { "inside" } else { "OUTSIDE" })
    }
}

/// Verify the convergence box for the run artifacts in `dir`.
pub fn verify_bounds(dir: &Path) -> Result<BoundsReport, CliError> {
    let metrics = read_metrics(&dir.join(METRICS_FILE))?;
    let need = |key: &str| -> Result<f64, CliError> {
        metrics
            .get(key)
            .ok_or_else(|| {
                CliError::config(format!(
                    "metrics.txt lacks '{key}'; verify-bounds needs a controlled run"
                ))
            })?
            .parse::<f64>()
            .map_err(|_| CliError::config(format!("metrics.txt: '{key}' is not a number")))
    };
    let lambda = need("lambda")?;
    let eps_hat = need("eps_hat")?;
    let steady_start = need("steady_start_tau")?;

    let csv = read_timeseries(&dir.join(TIMESERIES_FILE))?;
    let tau = csv.get("tau")?;
    let xtilde = csv.get("xtilde")?;
    let xtilde_dot = csv.get("xtilde_dot")?;

    let mut max_e = 0.0f64;
    let mut max_edot = 0.0f64;
    for i in 0..tau.len() {
        if tau[i] >= steady_start {
            if !xtilde[i].is_finite() || !xtilde_dot[i].is_finite() {
                return Err(CliError::config(
                    "tracking-error columns are undefined; verify-bounds needs a controlled run"
                        .into(),
                ));
            }
            max_e = max_e.max(xtilde[i].abs());
            max_edot = max_edot.max(xtilde_dot[i].abs());
        }
    }

    let bounds = convergence_box(2, lambda, eps_hat);
    let bounds = [bounds[0], bounds[1]];
    let observed = [max_e, max_edot];
    let inside = observed[0] <= bounds[0] + BOX_TOLERANCE && observed[1] <= bounds[1] + BOX_TOLERANCE;
    Ok(BoundsReport { lambda, eps_hat, steady_start_tau: steady_start, bounds, observed, inside })
}
