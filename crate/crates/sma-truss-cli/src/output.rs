//! Flat-file outputs: timeseries.csv, poincare.csv, metrics.txt.
//!
//! Floats are written with Rust's shortest round-trip formatting, which is
//! locale-independent (always a dot separator) and parses back to the same
//! bits. Columns undefined for a run (tracking error without a controller)
//! are NaN.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use sma_truss::sim::{Scenario, ScenarioResult};

use crate::CliError;

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const POINCARE_FILE: &str = "poincare.csv";
pub const METRICS_FILE: &str = "metrics.txt";

pub const TIMESERIES_HEADER: &str = "tau,x,y,u,d_hat,s,xtilde,xtilde_dot";

/// Write all three artifacts into `dir` (created if missing).
pub fn write_artifacts(dir: &Path, sc: &Scenario, result: &ScenarioResult) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    write_timeseries(&dir.join(TIMESERIES_FILE), result)?;
    write_poincare(&dir.join(POINCARE_FILE), result)?;
    write_metrics(&dir.join(METRICS_FILE), sc, result)?;
    Ok(())
}

fn write_timeseries(path: &Path, result: &ScenarioResult) -> Result<(), CliError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{TIMESERIES_HEADER}")?;
    for i in 0..result.tau.len() {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            result.tau[i],
            result.x[i],
            result.y[i],
            result.u[i],
            result.d_hat[i],
            result.s[i],
            result.xtilde[i],
            result.xtilde_dot[i]
        )?;
    }
    w.flush()?;
    Ok(())
}

fn write_poincare(path: &Path, result: &ScenarioResult) -> Result<(), CliError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "tau,x,y")?;
    for p in &result.poincare {
        writeln!(w, "{},{},{}", p.tau, p.x, p.y)?;
    }
    w.flush()?;
    Ok(())
}

fn write_metrics(path: &Path, sc: &Scenario, result: &ScenarioResult) -> Result<(), CliError> {
    let m = &result.metrics;
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "controlled={}", sc.controller.is_some())?;
    writeln!(w, "duration={}", sc.duration)?;
    writeln!(w, "plant_rate={}", sc.plant_rate)?;
    writeln!(w, "control_rate={}", sc.control_rate)?;
    writeln!(w, "plant_dt={}", 1.0 / sc.plant_rate)?;
    writeln!(w, "control_dt={}", 1.0 / sc.control_rate)?;
    writeln!(w, "transient_fraction={}", sc.transient_fraction)?;
    writeln!(w, "steady_start_tau={}", m.steady_start_tau)?;
    writeln!(w, "snap_through_count={}", m.snap_through_count)?;
    writeln!(w, "snap_through_count_total={}", m.snap_through_total)?;
    writeln!(w, "poincare_points={}", m.poincare_points)?;
    writeln!(w, "poincare_distinct={}", m.poincare_distinct)?;
    if let Some(lambda) = m.lambda {
        writeln!(w, "lambda={lambda}")?;
    }
    if let Some(v) = m.rms_error {
        writeln!(w, "rms_error={v}")?;
    }
    if let Some(v) = m.max_abs_error {
        writeln!(w, "max_abs_error={v}")?;
    }
    if let Some(v) = m.max_abs_error_rate {
        writeln!(w, "max_abs_error_rate={v}")?;
    }
    if let Some(v) = m.eps_hat {
        writeln!(w, "eps_hat={v}")?;
    }
    if let Some([bx, bxd]) = m.box_bounds {
        writeln!(w, "box_bound_x={bx}")?;
        writeln!(w, "box_bound_xdot={bxd}")?;
    }
    if let Some(v) = m.inside_box {
        writeln!(w, "inside_box={v}")?;
    }
    if let Some(v) = m.box_entry_tau {
        writeln!(w, "box_entry_tau={v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Parse a metrics.txt into a key -> value map.
pub fn read_metrics(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let text = fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::config(format!(
                "{}:{}: expected key=value, got '{line}'",
                path.display(),
                lineno + 1
            ))
        })?;
        map.insert(k.to_string(), v.to_string());
    }
    Ok(map)
}

/// Columns of a timeseries.csv, keyed by header name.
pub struct CsvColumns {
    pub columns: HashMap<String, Vec<f64>>,
}

impl CsvColumns {
    pub fn get(&self, name: &str) -> Result<&[f64], CliError> {
        self.columns
            .get(name)
            .map(|v| v.as_slice())
            .ok_or_else(|| CliError::config(format!("missing column '{name}'")))
    }
}

pub fn read_timeseries(path: &Path) -> Result<CsvColumns, CliError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::config(format!("{}: empty file", path.display())))?;
    let names: Vec<&str> = header.split(',').collect();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(CliError::config(format!(
                "{}:{}: expected {} fields, got {}",
                path.display(),
                lineno + 2,
                names.len(),
                fields.len()
            )));
        }
        for (col, field) in cols.iter_mut().zip(&fields) {
            let v = field.parse::<f64>().map_err(|_| {
                CliError::config(format!(
                    "{}:{}: '{field}' is not a number",
                    path.display(),
                    lineno + 2
                ))
            })?;
            col.push(v);
        }
    }
    let columns = names
        .into_iter()
        .map(str::to_string)
        .zip(cols)
        .collect::<HashMap<_, _>>();
    Ok(CsvColumns { columns })
}
