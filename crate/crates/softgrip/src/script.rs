//! Mission script files.
//!
//! ```toml
//! duration = 50.0
//! controller = "ffp"   # optional; falls back to [run] controller
//! seed = 7             # optional; --seed wins
//! airborne = true      # optional, default false
//!
//! [[step]]
//! at = 0.0
//! action = "set_pwm"
//! pwm = 1100
//!
//! [[step]]
//! at = 1.0
//! action = "place_object"
//! object = "water_bottle"          # fixture name, or inline:
//! # shape = { kind = "sphere", diameter = 60.0 }
//! # mass = 120.0
//! offset = 4.0
//! ```
//!
//! Other actions: `descend`, `ascend`, `assert_hold` (with `hold`, seconds),
//! `land` (with `incline`, degrees).

use std::path::Path;

use serde::Deserialize;
use softgrip_core::grasp::Shape;
use softgrip_core::mission::{Action, MissionScript, Step};
use softgrip_core::{ControllerKind, ObjectSpec};

use crate::config::ConfigError;
use crate::fixtures::ObjectSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ActionKind {
    SetPwm,
    PlaceObject,
    Descend,
    Ascend,
    AssertHold,
    Land,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepFile {
    at: f64,
    action: ActionKind,
    pwm: Option<u32>,
    object: Option<String>,
    shape: Option<Shape>,
    mass: Option<f64>,
    non_static_cg: Option<bool>,
    offset: Option<f64>,
    hold: Option<f64>,
    incline: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScriptFile {
    duration: f64,
    controller: Option<ControllerKind>,
    seed: Option<u64>,
    #[serde(default)]
    airborne: bool,
    #[serde(default)]
    step: Vec<StepFile>,
}

fn need<T>(v: Option<T>, i: usize, key: &str, action: &str) -> Result<T, ConfigError> {
    v.ok_or_else(|| ConfigError::Invalid(format!("step {i}: `{action}` requires `{key}`")))
}

fn convert(i: usize, s: &StepFile, objects: &ObjectSet) -> Result<Action, ConfigError> {
    Ok(match s.action {
        ActionKind::SetPwm => Action::SetPwm(need(s.pwm, i, "pwm", "set_pwm")?),
        ActionKind::PlaceObject => {
            let mut object = match (&s.object, s.shape) {
                (Some(name), None) => objects.get(name)?.spec(),
                (None, Some(shape)) => ObjectSpec::new(shape, need(s.mass, i, "mass", "place_object")?),
                _ => {
                    return Err(ConfigError::Invalid(format!(
                        "step {i}: `place_object` needs exactly one of `object` or `shape`"
                    )))
                }
            };
            if let Some(m) = s.mass {
                object.mass = m;
            }
            if let Some(ns) = s.non_static_cg {
                object.non_static_cg = ns;
            }
            Action::PlaceObject {
                object,
                offset: s.offset.unwrap_or(0.0),
            }
        }
        ActionKind::Descend => Action::Descend,
        ActionKind::Ascend => Action::Ascend,
        ActionKind::AssertHold => Action::AssertHold(need(s.hold, i, "hold", "assert_hold")?),
        ActionKind::Land => Action::Land(need(s.incline, i, "incline", "land")?),
    })
}

/// Parses a script. `controller` and `seed` fill in what the file omits.
pub fn parse_script(
    text: &str,
    origin: &str,
    objects: &ObjectSet,
    controller: ControllerKind,
    seed: u64,
) -> Result<MissionScript, ConfigError> {
    let file: ScriptFile = toml::from_str(text).map_err(|e| ConfigError::Parse {
        origin: origin.to_string(),
        message: e.to_string(),
    })?;
    let steps = file
        .step
        .iter()
        .enumerate()
        .map(|(i, s)| convert(i, s, objects).map(|a| Step::new(s.at, a)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| ConfigError::Invalid(format!("{origin}: {e}")))?;
    let script = MissionScript {
        steps,
        duration: file.duration,
        controller: file.controller.unwrap_or(controller),
        seed: file.seed.unwrap_or(seed),
        airborne: file.airborne,
    };
    script
        .validate()
        .map_err(|e| ConfigError::Invalid(format!("{origin}: {e}")))?;
    Ok(script)
}

pub fn load_script(
    path: &Path,
    objects: &ObjectSet,
    controller: ControllerKind,
    seed: u64,
) -> Result<MissionScript, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_script(&text, &path.display().to_string(), objects, controller, seed)
}
