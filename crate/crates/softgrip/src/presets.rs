//! Named experiment presets.

use std::fmt;
use std::str::FromStr;

use softgrip_core::command::{PWM_DEFLATE_US, PWM_INFLATE_US};
use softgrip_core::mission::{Action, MissionScript};
use softgrip_core::{Base, ControllerKind, ObjectSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    StepResponse,
    AerialGrasp,
    Payload,
    LandingGround,
    LandingTilt,
    GraspMatrix,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::StepResponse,
        Preset::AerialGrasp,
        Preset::Payload,
        Preset::LandingGround,
        Preset::LandingTilt,
        Preset::GraspMatrix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::StepResponse => "step-response",
            Preset::AerialGrasp => "aerial-grasp",
            Preset::Payload => "payload",
            Preset::LandingGround => "landing-ground",
            Preset::LandingTilt => "landing-tilt",
            Preset::GraspMatrix => "grasp-matrix",
        }
    }

    /// Bases a preset runs on when `--base` is not given.
    pub fn default_bases(self) -> &'static [Base] {
        match self {
            Preset::AerialGrasp => &[Base::HBase],
            // the cascade caps H at 200 g, below the 217 g payload
            Preset::Payload => &[Base::XBase],
            Preset::StepResponse => &[Base::HBase],
            Preset::LandingGround | Preset::LandingTilt | Preset::GraspMatrix => &[Base::XBase, Base::HBase],
        }
    }

    pub fn default_object(self) -> Option<&'static str> {
        match self {
            Preset::AerialGrasp => Some("water_bottle"),
            Preset::Payload => Some("plastic_container"),
            _ => None,
        }
    }

    pub fn default_incline(self) -> f64 {
        match self {
            Preset::LandingTilt => 10.0,
            _ => 0.0,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
            format!("unknown preset `{s}` (known: {})", names.join(", "))
        })
    }
}

const DEFLATE: Action = Action::SetPwm(PWM_DEFLATE_US as u32);
const INFLATE: Action = Action::SetPwm(PWM_INFLATE_US as u32);

/// Vehicle in the air opens the gripper, descends on the object, closes and
/// holds for 30 s while climbing away.
pub fn aerial_grasp(object: ObjectSpec, offset: f64, controller: ControllerKind, seed: u64) -> MissionScript {
    let mut s = MissionScript::new(50.0, controller, seed)
        .step(0.0, DEFLATE)
        .step(1.0, Action::PlaceObject { object, offset })
        .step(10.0, Action::Descend)
        .step(11.0, INFLATE)
        .step(18.0, Action::AssertHold(30.0))
        .step(19.0, Action::Ascend);
    s.airborne = true;
    s
}

/// Object loaded on the ground, then carried in a hover for 30 s.
pub fn payload(object: ObjectSpec, offset: f64, controller: ControllerKind, seed: u64) -> MissionScript {
    MissionScript::new(45.0, controller, seed)
        .step(0.0, DEFLATE)
        .step(0.5, Action::PlaceObject { object, offset })
        .step(5.0, Action::Descend)
        .step(6.0, INFLATE)
        .step(13.0, Action::Ascend)
        .step(14.0, Action::AssertHold(30.0))
}

/// Static bench grasp held for 30 s.
pub fn static_grasp(object: ObjectSpec, offset: f64, controller: ControllerKind, seed: u64) -> MissionScript {
    MissionScript::new(45.0, controller, seed)
        .step(0.0, DEFLATE)
        .step(0.5, Action::PlaceObject { object, offset })
        .step(5.0, Action::Descend)
        .step(6.0, INFLATE)
        .step(13.0, Action::AssertHold(30.0))
}

/// Take off with the gripper open and land on an incline.
pub fn landing(incline: f64, controller: ControllerKind, seed: u64) -> MissionScript {
    MissionScript::new(12.0, controller, seed)
        .step(0.0, DEFLATE)
        .step(1.0, Action::Ascend)
        .step(10.0, Action::Land(incline))
}
