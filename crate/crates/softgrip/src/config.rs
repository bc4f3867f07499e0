//! Run configuration.
//!
//! A config file is TOML with these sections, all optional; every key
//! defaults to the calibrated value and unknown keys are rejected:
//!
//! ```toml
//! [run]
//! seed = 1
//! controller = "ffp"        # "ffp" | "p"
//! base = "h"                # "x" | "h"; omitted = preset default
//! trials = 100
//! offset_jitter = 15.0      # mm, batch placement error half-width
//! out = "out"
//! objects = "objects.toml"  # optional replacement object set
//!
//! [controller]              # r_inflate r_deflate p_max p_min_inflate
//!                           # p_min_deflate f_in hold_band resume_band
//! [plant]                   # p_pump_in p_pump_out k_pump k_leak dt initial_pressure
//! [sensor]                  # range_low range_high noise_sd
//! [limits]                  # blow_away_mass h_mass_limit x_mass_limit payload_limit
//!                           # non_static_success x_tilt_success_at_10deg
//! [gripper_x]               # finger_length finger_width mount_angle aperture_open
//! [gripper_h]               # close_onset close_full open_full pair_gap
//!
//! [mission]
//! object = "water_bottle"   # fixture name for mission presets
//! object_mass = 75.0        # optional mass override, g
//! offset = 0.0              # lateral placement error, mm
//! incline = 10.0            # landing incline override, degrees
//! ```
//!
//! Environment variables `SOFTGRIP_<SECTION>__<KEY>` override file values,
//! e.g. `SOFTGRIP_PLANT__K_LEAK=0.02`. Command-line flags override both.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use softgrip_core::{
    Base, ControllerKind, ControllerParams, GraspLimits, GripperGeometry, PlantParams, SensorModel, SimConfig,
};
use thiserror::Error;

pub const ENV_PREFIX: &str = "SOFTGRIP_";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("environment variable {var}: {message}")]
    Env { var: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub controller: ControllerKind,
    pub base: Option<Base>,
    pub trials: u32,
    pub offset_jitter: f64,
    pub out: PathBuf,
    pub objects: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 1,
            controller: ControllerKind::FeedForwardProportional,
            base: None,
            trials: 100,
            offset_jitter: 15.0,
            out: PathBuf::from("out"),
            objects: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MissionSection {
    pub object: Option<String>,
    pub object_mass: Option<f64>,
    pub offset: f64,
    pub incline: Option<f64>,
}

/// Per-base geometry overrides; unset keys keep the base defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryOverride {
    pub finger_length: Option<f64>,
    pub finger_width: Option<f64>,
    pub mount_angle: Option<f64>,
    pub aperture_open: Option<f64>,
    pub close_onset: Option<f64>,
    pub close_full: Option<f64>,
    pub open_full: Option<f64>,
    pub pair_gap: Option<f64>,
}

impl GeometryOverride {
    pub fn apply(&self, mut g: GripperGeometry) -> GripperGeometry {
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut g.finger_length, self.finger_length);
        set(&mut g.finger_width, self.finger_width);
        set(&mut g.mount_angle, self.mount_angle);
        set(&mut g.aperture_open, self.aperture_open);
        set(&mut g.close_onset, self.close_onset);
        set(&mut g.close_full, self.close_full);
        set(&mut g.open_full, self.open_full);
        set(&mut g.pair_gap, self.pair_gap);
        g
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub controller: ControllerParams,
    pub plant: PlantParams,
    pub sensor: SensorModel,
    pub limits: GraspLimits,
    pub gripper_x: GeometryOverride,
    pub gripper_h: GeometryOverride,
    pub mission: MissionSection,
}

fn env_value(raw: &str) -> toml::Value {
    // bare words such as `h` or `ffp` are taken as strings
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

impl RunConfig {
    /// Parses config text, then applies `SOFTGRIP_*` overrides from `env`.
    pub fn from_sources<I>(text: Option<(&str, &str)>, env: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut table = match text {
            Some((body, origin)) => {
                // deserializing from text keeps line/column spans in errors
                let parse_err = |e: toml::de::Error| ConfigError::Parse {
                    origin: origin.to_string(),
                    message: e.to_string(),
                };
                toml::from_str::<RunConfig>(body).map_err(parse_err)?;
                body.parse::<toml::Table>().map_err(parse_err)?
            }
            None => toml::Table::new(),
        };

        let mut overrides: Vec<(String, String)> = env.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
        overrides.sort();
        for (var, raw) in overrides {
            let rest = &var[ENV_PREFIX.len()..];
            let Some((section, key)) = rest.split_once("__") else {
                return Err(ConfigError::Env {
                    var,
                    message: "expected SOFTGRIP_<SECTION>__<KEY>".into(),
                });
            };
            let (section, key) = (section.to_ascii_lowercase(), key.to_ascii_lowercase());
            let entry = table
                .entry(section.clone())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            let Some(sub) = entry.as_table_mut() else {
                return Err(ConfigError::Env {
                    var,
                    message: format!("`{section}` is not a section"),
                });
            };
            sub.insert(key, env_value(&raw));
        }

        let origin = "environment overrides";
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse {
                origin: origin.to_string(),
                message: e.to_string(),
            })?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let env = std::env::vars();
        match path {
            Some(p) => {
                let body = std::fs::read_to_string(p).map_err(|e| ConfigError::Io {
                    path: p.to_path_buf(),
                    source: e,
                })?;
                Self::from_sources(Some((&body, &p.display().to_string())), env)
            }
            None => Self::from_sources(None, env),
        }
    }

    pub fn geometry(&self, base: Base) -> GripperGeometry {
        match base {
            Base::XBase => self.gripper_x.apply(GripperGeometry::x_base()),
            Base::HBase => self.gripper_h.apply(GripperGeometry::h_base()),
        }
    }

    pub fn sim_config(&self, base: Base) -> SimConfig {
        SimConfig {
            controller: self.controller,
            plant: self.plant,
            sensor: self.sensor,
            gripper: self.geometry(base),
            limits: self.limits,
        }
    }

    /// Checks every section. Run after flag overrides, before any simulation.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let section = |name: &str, r: Result<(), String>| r.map_err(|e| ConfigError::Invalid(format!("[{name}] {e}")));
        section("controller", self.controller.validate().map_err(|e| e.to_string()))?;
        section("plant", self.plant.validate().map_err(|e| e.to_string()))?;
        section("sensor", self.sensor.validate().map_err(|e| e.to_string()))?;
        section("limits", self.limits.validate().map_err(|e| e.to_string()))?;
        section(
            "gripper_x",
            self.geometry(Base::XBase).validate().map_err(|e| e.to_string()),
        )?;
        section(
            "gripper_h",
            self.geometry(Base::HBase).validate().map_err(|e| e.to_string()),
        )?;
        if self.run.trials == 0 {
            return Err(ConfigError::Invalid("[run] trials must be at least 1".into()));
        }
        if !(self.run.offset_jitter >= 0.0 && self.run.offset_jitter.is_finite()) {
            return Err(ConfigError::Invalid("[run] offset_jitter must be non-negative".into()));
        }
        if let Some(m) = self.mission.object_mass {
            if !(m > 0.0 && m.is_finite()) {
                return Err(ConfigError::Invalid("[mission] object_mass must be positive".into()));
            }
        }
        if !self.mission.offset.is_finite() {
            return Err(ConfigError::Invalid("[mission] offset must be finite".into()));
        }
        if let Some(i) = self.mission.incline {
            if !(0.0..=45.0).contains(&i) {
                return Err(ConfigError::Invalid(
                    "[mission] incline must lie in 0..=45 degrees".into(),
                ));
            }
        }
        Ok(())
    }
}
