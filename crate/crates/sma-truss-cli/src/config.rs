//! Flat TOML run configuration: sections for material, geometry, excitation,
//! dynamics, controller, fuzzy, and simulation.
//!
//! The dynamics come either from a `[dynamics]` section (nondimensional
//! mode) or from the `[material]`/`[geometry]`/`[excitation]` trio
//! (dimensional mode, converted through the nondimensionalization map).
//! Unknown keys are rejected, overrides are type-checked, and
//! [`Config::resolved`] fills in every default so a dumped config reloads
//! to an identical scenario.

use serde::{Deserialize, Serialize};
use sma_truss::constitutive::{MaterialProperties, TrussGeometry};
use sma_truss::control::{ControllerConfig, DesiredState, ModelEstimates};
use sma_truss::dynamics::TrussParams;
use sma_truss::fuzzy::{MembershipPartition, DEFAULT_CONSEQUENT_LIMIT, DEFAULT_LEARNING_RATE};
use sma_truss::sim::{ControllerSetup, Scenario};

use crate::CliError;

pub const PRESET_NAMES: [&str; 3] = ["uncontrolled", "fl", "fuzzy-fl"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub material: Option<MaterialSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometrySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub excitation: Option<ExcitationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub controller: Option<ControllerSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fuzzy: Option<FuzzySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    pub a1_mpa_per_k: f64,
    pub a2_mpa: f64,
    pub a3_mpa: f64,
    pub t_m_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub l0_m: f64,
    pub phi0_rad: f64,
    pub area_m2: f64,
    pub mass_kg: f64,
    pub damping_n_s_per_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcitationSection {
    pub temperature_k: f64,
    pub force_amplitude_n: f64,
    pub frequency_rad_per_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    pub theta: f64,
    pub xi: f64,
    pub gamma: f64,
    pub omega: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha2_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha3_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fuzzy_enabled: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xd_dot: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xd_ddot: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FuzzySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consequent_limit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transient_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blow_up_limit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plant_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control_rate: Option<f64>,
}

impl Config {
    /// Built-in scenario: the chaotic reference truss (theta = 0.69,
    /// Omega = 0.5, xi = 0.05, gamma = 0.020) with no controller, or with
    /// conventional / fuzzy-compensated feedback linearization toward
    /// xd = [0.68, 0].
    pub fn preset(name: &str) -> Result<Self, CliError> {
        let dynamics = DynamicsSection {
            theta: 0.69,
            xi: 0.05,
            gamma: 0.020,
            omega: 0.5,
            alpha2: 1.240e2,
            alpha3: 1.450e4,
            b: 0.866,
        };
        let controller = |fuzzy: bool| ControllerSection {
            fuzzy_enabled: Some(fuzzy),
            ..ControllerSection::default()
        };
        let base = Config {
            material: None,
            geometry: None,
            excitation: None,
            dynamics: Some(dynamics),
            controller: None,
            fuzzy: None,
            simulation: None,
        };
        match name {
            "uncontrolled" => Ok(base),
            "fl" => Ok(Config { controller: Some(controller(false)), ..base }),
            "fuzzy-fl" => Ok(Config {
                controller: Some(controller(true)),
                fuzzy: Some(FuzzySection::default()),
                ..base
            }),
            other => Err(CliError::config(format!(
                "unknown preset '{other}' (available: {})",
                PRESET_NAMES.join(", ")
            ))),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(format!("config parse error: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Nondimensional parameters from whichever mode the config uses.
    fn params(&self) -> Result<TrussParams, CliError> {
        match (&self.dynamics, &self.material, &self.geometry, &self.excitation) {
            (Some(dynamics), None, None, None) => TrussParams::new(
                dynamics.theta,
                dynamics.xi,
                dynamics.gamma,
                dynamics.omega,
                dynamics.alpha2,
                dynamics.alpha3,
                dynamics.b,
            )
            .map_err(CliError::from),
            (None, Some(mat), Some(geom), Some(exc)) => {
                let mat = MaterialProperties::new(
                    mat.a1_mpa_per_k,
                    mat.a2_mpa,
                    mat.a3_mpa,
                    mat.t_m_k,
                )?;
                let geom = TrussGeometry::new(
                    geom.l0_m,
                    geom.phi0_rad,
                    geom.area_m2,
                    geom.mass_kg,
                    geom.damping_n_s_per_m,
                )?;
                TrussParams::from_dimensional(
                    &mat,
                    &geom,
                    exc.temperature_k,
                    exc.force_amplitude_n,
                    exc.frequency_rad_per_s,
                )
                .map_err(CliError::from)
            }
            (Some(_), _, _, _) => Err(CliError::config(
                "give either [dynamics] or the [material]/[geometry]/[excitation] trio, not both"
                    .into(),
            )),
            _ => Err(CliError::config(
                "missing dynamics: provide [dynamics] or all of [material], [geometry], [excitation]"
                    .into(),
            )),
        }
    }

    /// A copy with every default filled in, suitable for `--dump-config`.
    /// Resolving is idempotent: a resolved config resolves to itself.
    pub fn resolved(&self) -> Result<Config, CliError> {
        let params = self.params()?;
        let mut out = self.clone();

        let sim = out.simulation.get_or_insert_with(SimulationSection::default);
        sim.x0.get_or_insert(0.68);
        sim.y0.get_or_insert(0.0);
        sim.duration.get_or_insert(1000.0);
        sim.transient_fraction.get_or_insert(0.5);
        sim.blow_up_limit.get_or_insert(10.0);
        let (auto_plant, auto_control) = Scenario::study_rates(params.omega);
        if sim.plant_rate.is_none() || sim.control_rate.is_none() {
            if params.omega <= 0.0 {
                return Err(CliError::config(
                    "sampling rates must be given explicitly when omega = 0".into(),
                ));
            }
            sim.plant_rate.get_or_insert(auto_plant);
            sim.control_rate.get_or_insert(auto_control);
        }

        if let Some(ctrl) = out.controller.as_mut() {
            ctrl.order.get_or_insert(2);
            ctrl.lambda.get_or_insert(0.6);
            ctrl.alpha2_hat.get_or_insert(1.0e2);
            ctrl.alpha3_hat.get_or_insert(1.15e4);
            ctrl.theta_hat.get_or_insert(params.theta);
            ctrl.xi_hat.get_or_insert(params.xi);
            ctrl.b_hat.get_or_insert(params.b);
            ctrl.fuzzy_enabled.get_or_insert(false);
            ctrl.xd.get_or_insert(0.68);
            ctrl.xd_dot.get_or_insert(0.0);
            ctrl.xd_ddot.get_or_insert(0.0);
            if ctrl.fuzzy_enabled == Some(true) {
                let fuzzy = out.fuzzy.get_or_insert_with(FuzzySection::default);
                fuzzy
                    .centers
                    .get_or_insert_with(|| MembershipPartition::six_center_default().centers().to_vec());
                fuzzy.learning_rate.get_or_insert(DEFAULT_LEARNING_RATE);
                fuzzy.consequent_limit.get_or_insert(DEFAULT_CONSEQUENT_LIMIT);
            }
        }
        Ok(out)
    }

    /// Build the runnable scenario. Call on a [`Config::resolved`] config;
    /// resolution happens implicitly otherwise.
    pub fn to_scenario(&self) -> Result<Scenario, CliError> {
        let cfg = self.resolved()?;
        let params = cfg.params()?;
        let sim = cfg.simulation.as_ref().expect("resolved");

        let controller = match cfg.controller.as_ref() {
            None => None,
            Some(ctrl) => {
                let config = ControllerConfig {
                    order: ctrl.order.unwrap() as usize,
                    lambda: ctrl.lambda.unwrap(),
                    estimates: ModelEstimates {
                        theta: ctrl.theta_hat.unwrap(),
                        xi: ctrl.xi_hat.unwrap(),
                        alpha2: ctrl.alpha2_hat.unwrap(),
                        alpha3: ctrl.alpha3_hat.unwrap(),
                        b: ctrl.b_hat.unwrap(),
                    },
                    fuzzy_enabled: ctrl.fuzzy_enabled.unwrap(),
                };
                let fuzzy = cfg.fuzzy.clone().unwrap_or_default();
                let partition = match fuzzy.centers {
                    Some(centers) => MembershipPartition::new(centers)?,
                    None => MembershipPartition::six_center_default(),
                };
                Some(ControllerSetup {
                    config,
                    setpoint: DesiredState {
                        x: ctrl.xd.unwrap(),
                        xdot: ctrl.xd_dot.unwrap(),
                        xddot: ctrl.xd_ddot.unwrap(),
                    },
                    partition,
                    learning_rate: fuzzy.learning_rate.unwrap_or(DEFAULT_LEARNING_RATE),
                    consequent_limit: fuzzy.consequent_limit.unwrap_or(DEFAULT_CONSEQUENT_LIMIT),
                })
            }
        };

        Ok(Scenario {
            params,
            controller,
            x0: sim.x0.unwrap(),
            y0: sim.y0.unwrap(),
            duration: sim.duration.unwrap(),
            plant_rate: sim.plant_rate.unwrap(),
            control_rate: sim.control_rate.unwrap(),
            transient_fraction: sim.transient_fraction.unwrap(),
            blow_up_limit: sim.blow_up_limit.unwrap(),
        })
    }

    /// Apply one `key=value` or `section.key=value` override.
    pub fn apply_set(&mut self, spec: &str) -> Result<(), CliError> {
        let (path, raw) = spec
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("override '{spec}' is not KEY=VALUE")))?;
        let path = path.trim();
        let raw = raw.trim();
        let (section, key) = match path.split_once('.') {
            Some((s, k)) => (s.to_string(), k.to_string()),
            None => (self.section_for_key(path)?, path.to_string()),
        };

        let f = || parse_f64(&section, &key, raw);
        match (section.as_str(), key.as_str()) {
            ("dynamics", k) => {
                let d = self.dynamics.as_mut().ok_or_else(|| {
                    CliError::config("no [dynamics] section to override".into())
                })?;
                match k {
                    "theta" => d.theta = f()?,
                    "xi" => d.xi = f()?,
                    "gamma" => d.gamma = f()?,
                    "omega" => d.omega = f()?,
                    "alpha2" => d.alpha2 = f()?,
                    "alpha3" => d.alpha3 = f()?,
                    "b" => d.b = f()?,
                    _ => return Err(unknown_key(&section, k)),
                }
            }
            ("material", k) => {
                let m = self.material.as_mut().ok_or_else(|| {
                    CliError::config("no [material] section to override".into())
                })?;
                match k {
                    "a1_mpa_per_k" => m.a1_mpa_per_k = f()?,
                    "a2_mpa" => m.a2_mpa = f()?,
                    "a3_mpa" => m.a3_mpa = f()?,
                    "t_m_k" => m.t_m_k = f()?,
                    _ => return Err(unknown_key(&section, k)),
                }
            }
            ("geometry", k) => {
                let g = self.geometry.as_mut().ok_or_else(|| {
                    CliError::config("no [geometry] section to override".into())
                })?;
                match k {
                    "l0_m" => g.l0_m = f()?,
                    "phi0_rad" => g.phi0_rad = f()?,
                    "area_m2" => g.area_m2 = f()?,
                    "mass_kg" => g.mass_kg = f()?,
                    "damping_n_s_per_m" => g.damping_n_s_per_m = f()?,
                    _ => return Err(unknown_key(&section, k)),
                }
            }
            ("excitation", k) => {
                let e = self.excitation.as_mut().ok_or_else(|| {
                    CliError::config("no [excitation] section to override".into())
                })?;
                match k {
                    "temperature_k" => e.temperature_k = f()?,
                    "force_amplitude_n" => e.force_amplitude_n = f()?,
                    "frequency_rad_per_s" => e.frequency_rad_per_s = f()?,
                    _ => return Err(unknown_key(&section, k)),
                }
            }
            ("controller", k) => {
                let c = self.controller.get_or_insert_with(ControllerSection::default);
                match k {
                    "order" => {
                        c.order = Some(raw.parse().map_err(|_| {
                            CliError::config(format!("controller.order: '{raw}' is not an integer"))
                        })?)
                    }
                    "lambda" => c.lambda = Some(f()?),
                    "alpha2_hat" => c.alpha2_hat = Some(f()?),
                    "alpha3_hat" => c.alpha3_hat = Some(f()?),
                    "theta_hat" => c.theta_hat = Some(f()?),
                    "xi_hat" => c.xi_hat = Some(f()?),
                    "b_hat" => c.b_hat = Some(f()?),
                    "fuzzy_enabled" => c.fuzzy_enabled = Some(parse_bool(&section, k, raw)?),
                    "xd" => c.xd = Some(f()?),
                    "xd_dot" => c.xd_dot = Some(f()?),
                    "xd_ddot" => c.xd_ddot = Some(f()?),
                    _ => return Err(unknown_key(&section, k)),
                }
            }
            ("fuzzy", k) => {
                let fz = self.fuzzy.get_or_insert_with(FuzzySection::default);
                match k {
                    "centers" => {
                        let centers = raw
                            .split(',')
                            .map(|v| v.trim().parse::<f64>())
                            .collect::<Result<Vec<f64>, _>>()
                            .map_err(|_| {
                                CliError::config(format!(
                                    "fuzzy.centers: '{raw}' is not a comma-separated float list"
                                ))
                            })?;
                        fz.centers = Some(centers);
                    }
                    "learning_rate" => fz.learning_rate = Some(f()?),
                    "consequent_limit" => fz.consequent_limit = Some(f()?),
                    _ => return Err(unknown_key(&section, k)),
                }
            }
            ("simulation", k) => {
                let s = self.simulation.get_or_insert_with(SimulationSection::default);
                match k {
                    "x0" => s.x0 = Some(f()?),
                    "y0" => s.y0 = Some(f()?),
                    "duration" => s.duration = Some(f()?),
                    "transient_fraction" => s.transient_fraction = Some(f()?),
                    "blow_up_limit" => s.blow_up_limit = Some(f()?),
                    "plant_rate" => s.plant_rate = Some(f()?),
                    "control_rate" => s.control_rate = Some(f()?),
                    _ => return Err(unknown_key(&section, k)),
                }
            }
            (s, _) => {
                return Err(CliError::config(format!(
                    "unknown section '{s}' (material, geometry, excitation, dynamics, controller, fuzzy, simulation)"
                )))
            }
        }
        Ok(())
    }

    fn section_for_key(&self, key: &str) -> Result<String, CliError> {
        const TABLE: &[(&str, &[&str])] = &[
            ("dynamics", &["theta", "xi", "gamma", "omega", "alpha2", "alpha3", "b"]),
            ("material", &["a1_mpa_per_k", "a2_mpa", "a3_mpa", "t_m_k"]),
            ("geometry", &["l0_m", "phi0_rad", "area_m2", "mass_kg", "damping_n_s_per_m"]),
            ("excitation", &["temperature_k", "force_amplitude_n", "frequency_rad_per_s"]),
            (
                "controller",
                &[
                    "order", "lambda", "alpha2_hat", "alpha3_hat", "theta_hat", "xi_hat", "b_hat",
                    "fuzzy_enabled", "xd", "xd_dot", "xd_ddot",
                ],
            ),
            ("fuzzy", &["centers", "learning_rate", "consequent_limit"]),
            (
                "simulation",
                &[
                    "x0", "y0", "duration", "transient_fraction", "blow_up_limit", "plant_rate",
                    "control_rate",
                ],
            ),
        ];
        let hits: Vec<&str> = TABLE
            .iter()
            .filter(|(_, keys)| keys.contains(&key))
            .map(|(section, _)| *section)
            .collect();
        match hits.as_slice() {
            [one] => Ok(one.to_string()),
            [] => Err(CliError::config(format!("unknown key '{key}'"))),
            many => Err(CliError::config(format!(
                "key '{key}' is ambiguous across sections {many:?}; qualify it"
            ))),
        }
    }
}

fn parse_f64(section: &str, key: &str, raw: &str) -> Result<f64, CliError> {
    raw.parse::<f64>()
        .map_err(|_| CliError::config(format!("{section}.{key}: '{raw}' is not a number")))
}

fn parse_bool(section: &str, key: &str, raw: &str) -> Result<bool, CliError> {
    match raw {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        _ => Err(CliError::config(format!("{section}.{key}: '{raw}' is not a boolean"))),
    }
}

fn unknown_key(section: &str, key: &str) -> CliError {
    CliError::config(format!("unknown key '{key}' in section [{section}]"))
}
