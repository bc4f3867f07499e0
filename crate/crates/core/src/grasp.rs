//! Gripper geometry, grasp feasibility and landing outcomes.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GraspError {
    #[error("invalid gripper geometry: {0}")]
    InvalidGeometry(&'static str),
    #[error("invalid object: {0}")]
    InvalidObject(&'static str),
    #[error("invalid grasp limits: {0}")]
    InvalidLimits(&'static str),
    #[error("landing incline {0} deg outside 0..=45")]
    InclineOutOfRange(f64),
}

/// Finger base layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Base {
    /// Four fingers converge on a centroid; suited to spheres.
    #[serde(rename = "x")]
    XBase,
    /// Two 2-tip finger pairs wrap; suited to cylinders and boxes.
    #[serde(rename = "h")]
    HBase,
}

impl Base {
    pub fn as_str(self) -> &'static str {
        match self {
            Base::XBase => "x",
            Base::HBase => "h",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GripperGeometry {
    pub base: Base,
    pub finger_length: f64,
    pub finger_width: f64,
    /// Finger mount inclination, degrees.
    pub mount_angle: f64,
    /// Fingertip distance when fully open, mm (diagonal for X, tip-to-tip for H).
    pub aperture_open: f64,
    /// Pressure at which the fingers start closing, kPa.
    pub close_onset: f64,
    /// Pressure at which the tips meet, kPa.
    pub close_full: f64,
    /// Deflation pressure holding the gripper fully open, kPa.
    pub open_full: f64,
    /// Distance between the two finger pairs, mm. Only meaningful for H.
    pub pair_gap: f64,
}

impl GripperGeometry {
    pub fn x_base() -> Self {
        Self {
            base: Base::XBase,
            finger_length: 100.0,
            finger_width: 15.0,
            mount_angle: 25.0,
            aperture_open: 180.0,
            close_onset: 58.0,
            close_full: 85.0,
            open_full: -25.0,
            pair_gap: 40.0,
        }
    }

    pub fn h_base() -> Self {
        Self {
            base: Base::HBase,
            aperture_open: 145.0,
            ..Self::x_base()
        }
    }

    pub fn for_base(base: Base) -> Self {
        match base {
            Base::XBase => Self::x_base(),
            Base::HBase => Self::h_base(),
        }
    }

    pub fn validate(&self) -> Result<(), GraspError> {
        if !(self.open_full < self.close_onset && self.close_onset < self.close_full) {
            return Err(GraspError::InvalidGeometry(
                "require open_full < close_onset < close_full",
            ));
        }
        if !(self.aperture_open > 0.0) {
            return Err(GraspError::InvalidGeometry("aperture_open must be positive"));
        }
        if self.base == Base::HBase && !(self.pair_gap > 0.0) {
            return Err(GraspError::InvalidGeometry("pair_gap must be positive for the H base"));
        }
        if !(self.finger_length > 0.0 && self.finger_width > 0.0) {
            return Err(GraspError::InvalidGeometry("finger dimensions must be positive"));
        }
        Ok(())
    }
}

/// Fingertip aperture in mm for a chamber pressure in kPa.
///
/// Flat at `aperture_open` up to `close_onset`, linear down to zero at
/// `close_full`, zero beyond.
pub fn aperture(pressure: f64, geom: &GripperGeometry) -> f64 {
    if pressure <= geom.close_onset {
        geom.aperture_open
    } else if pressure >= geom.close_full {
        0.0
    } else {
        geom.aperture_open * (geom.close_full - pressure) / (geom.close_full - geom.close_onset)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Cylinder { diameter: f64, height: f64 },
    Sphere { diameter: f64 },
    Box { width: f64, depth: f64, height: f64 },
}

impl Shape {
    /// Horizontal extent the fingers have to close around, mm.
    pub fn span(&self) -> f64 {
        match *self {
            Shape::Cylinder { diameter, .. } | Shape::Sphere { diameter } => diameter,
            Shape::Box { width, depth, .. } => width.min(depth),
        }
    }

    fn dims_positive(&self) -> bool {
        match *self {
            Shape::Cylinder { diameter, height } => diameter > 0.0 && height > 0.0,
            Shape::Sphere { diameter } => diameter > 0.0,
            Shape::Box { width, depth, height } => width > 0.0 && depth > 0.0 && height > 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub shape: Shape,
    /// Grams.
    pub mass: f64,
    /// Contents shift during handling (liquid, loose load).
    #[serde(default)]
    pub non_static_cg: bool,
}

impl ObjectSpec {
    pub fn new(shape: Shape, mass: f64) -> Self {
        Self {
            shape,
            mass,
            non_static_cg: false,
        }
    }

    pub fn validate(&self) -> Result<(), GraspError> {
        if !self.shape.dims_positive() {
            return Err(GraspError::InvalidObject("dimensions must be positive"));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(GraspError::InvalidObject("mass must be positive"));
        }
        Ok(())
    }
}

/// Mass thresholds and outcome probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraspLimits {
    /// Objects lighter than this are displaced by rotor downwash, g.
    pub blow_away_mass: f64,
    pub h_mass_limit: f64,
    pub x_mass_limit: f64,
    /// Heaviest object the vehicle can hover with, g.
    pub payload_limit: f64,
    pub non_static_success: f64,
    /// X-base landing success on a 10 degree incline.
    pub x_tilt_success_at_10deg: f64,
}

impl Default for GraspLimits {
    fn default() -> Self {
        Self {
            blow_away_mass: 70.0,
            h_mass_limit: 200.0,
            x_mass_limit: 330.0,
            payload_limit: 217.0,
            non_static_success: 0.8,
            x_tilt_success_at_10deg: 0.6,
        }
    }
}

impl GraspLimits {
    pub fn validate(&self) -> Result<(), GraspError> {
        let masses = [
            self.blow_away_mass,
            self.h_mass_limit,
            self.x_mass_limit,
            self.payload_limit,
        ];
        if !masses.iter().all(|m| *m >= 0.0 && m.is_finite()) {
            return Err(GraspError::InvalidLimits("mass limits must be non-negative"));
        }
        let probs = [self.non_static_success, self.x_tilt_success_at_10deg];
        if !probs.iter().all(|p| *p > 0.0 && *p <= 1.0) {
            return Err(GraspError::InvalidLimits("probabilities must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraspResult {
    Success,
    BlowAway,
    TooHeavy,
    GeometryMismatch,
    OffsetOutOfTolerance,
}

impl GraspResult {
    pub fn as_str(self) -> &'static str {
        match self {
            GraspResult::Success => "success",
            GraspResult::BlowAway => "blow_away",
            GraspResult::TooHeavy => "too_heavy",
            GraspResult::GeometryMismatch => "geometry_mismatch",
            GraspResult::OffsetOutOfTolerance => "offset_out_of_tolerance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspOutcome {
    pub result: GraspResult,
    pub success_probability: f64,
}

impl GraspOutcome {
    fn fail(result: GraspResult) -> Self {
        Self {
            result,
            success_probability: 0.0,
        }
    }
}

/// Evaluates an approach with the gripper open at `geom.aperture_open`.
/// The first failing check wins.
pub fn grasp_feasible(
    object: &ObjectSpec,
    geom: &GripperGeometry,
    limits: &GraspLimits,
    offset: f64,
    aerial: bool,
) -> GraspOutcome {
    if aerial && object.mass < limits.blow_away_mass {
        return GraspOutcome::fail(GraspResult::BlowAway);
    }
    let span = object.shape.span();
    if span >= geom.aperture_open {
        return GraspOutcome::fail(GraspResult::GeometryMismatch);
    }
    if let (Base::HBase, Shape::Sphere { diameter }) = (geom.base, object.shape) {
        if diameter < geom.pair_gap {
            return GraspOutcome::fail(GraspResult::GeometryMismatch);
        }
    }
    if offset.abs() > (geom.aperture_open - span) / 2.0 {
        return GraspOutcome::fail(GraspResult::OffsetOutOfTolerance);
    }
    let mass_limit = match geom.base {
        Base::HBase => limits.h_mass_limit,
        Base::XBase => limits.x_mass_limit,
    };
    if object.mass > mass_limit {
        return GraspOutcome::fail(GraspResult::TooHeavy);
    }
    GraspOutcome {
        result: GraspResult::Success,
        success_probability: if object.non_static_cg {
            limits.non_static_success
        } else {
            1.0
        },
    }
}

/// Whether the vehicle can hover with the object.
pub fn payload_check(object: &ObjectSpec, limits: &GraspLimits) -> bool {
    object.mass <= limits.payload_limit
}

/// Landing success probability on an incline in degrees.
pub fn landing_probability(geom: &GripperGeometry, limits: &GraspLimits, incline: f64) -> Result<f64, GraspError> {
    if !(0.0..=45.0).contains(&incline) {
        return Err(GraspError::InclineOutOfRange(incline));
    }
    Ok(match geom.base {
        Base::HBase => 1.0,
        Base::XBase => {
            let per_degree = (1.0 - limits.x_tilt_success_at_10deg) / 10.0;
            (1.0 - per_degree * incline).clamp(0.0, 1.0)
        }
    })
}

/// One landing attempt with the gripper fully open. Always consumes exactly
/// one uniform draw from `rng`.
pub fn landing_outcome<R: Rng + ?Sized>(
    geom: &GripperGeometry,
    limits: &GraspLimits,
    incline: f64,
    rng: &mut R,
) -> Result<bool, GraspError> {
    let p = landing_probability(geom, limits, incline)?;
    let draw: f64 = rng.random();
    Ok(draw < p)
}
