//! Object fixture files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use softgrip_core::grasp::{Base, GraspResult, Shape};
use softgrip_core::ObjectSpec;

use crate::config::ConfigError;

/// The shipped object set.
pub const BUILTIN_OBJECTS: &str = include_str!("../data/objects.toml");

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectFixture {
    pub label: String,
    pub shape: Shape,
    pub mass: f64,
    #[serde(default)]
    pub non_static_cg: bool,
    /// Part of the static grasp matrix.
    #[serde(default = "yes")]
    pub grasp_set: bool,
    pub expect_h: GraspResult,
    pub expect_x: GraspResult,
}

fn yes() -> bool {
    true
}

impl ObjectFixture {
    pub fn spec(&self) -> ObjectSpec {
        ObjectSpec {
            shape: self.shape,
            mass: self.mass,
            non_static_cg: self.non_static_cg,
        }
    }

    pub fn expected(&self, base: Base) -> GraspResult {
        match base {
            Base::HBase => self.expect_h,
            Base::XBase => self.expect_x,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSet {
    pub objects: BTreeMap<String, ObjectFixture>,
}

impl ObjectSet {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_OBJECTS, "<builtin objects>").expect("shipped object set parses")
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let set: ObjectSet = toml::from_str(text).map_err(|e| ConfigError::Parse {
            origin: origin.to_string(),
            message: e.to_string(),
        })?;
        for (name, o) in &set.objects {
            o.spec()
                .validate()
                .map_err(|e| ConfigError::Invalid(format!("{origin}: object `{name}`: {e}")))?;
        }
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn get(&self, name: &str) -> Result<&ObjectFixture, ConfigError> {
        self.objects.get(name).ok_or_else(|| {
            let known: Vec<&str> = self.objects.keys().map(String::as_str).collect();
            ConfigError::Invalid(format!("unknown object `{name}` (known: {})", known.join(", ")))
        })
    }

    /// Fixtures in the static grasp set, by name.
    pub fn grasp_set(&self) -> impl Iterator<Item = (&str, &ObjectFixture)> {
        self.objects
            .iter()
            .filter(|(_, o)| o.grasp_set)
            .map(|(k, v)| (k.as_str(), v))
    }
}
