//! PWM command decoding and the valve/pump airflow state machine.
//!
//! The flight controller selects one of three behaviours by pulse width:
//!
//! | width (µs)      | command   |
//! |-----------------|-----------|
//! | 800 ..= 1299    | deflation |
//! | 1300 ..= 1700   | rest      |
//! | 1701 ..= 2200   | inflation |
//!
//! Anything outside 800..=2200 µs is rejected; callers fall back to rest.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::ControllerMode;

pub const PWM_MIN_US: u16 = 800;
pub const PWM_MAX_US: u16 = 2200;
pub const DEFLATE_BELOW_US: u16 = 1300;
pub const INFLATE_ABOVE_US: u16 = 1700;

/// Nominal widths a servo tester would send for each command.
pub const PWM_DEFLATE_US: u16 = 1100;
pub const PWM_REST_US: u16 = 1500;
pub const PWM_INFLATE_US: u16 = 1900;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("pulse width {0} us outside accepted envelope {PWM_MIN_US}..={PWM_MAX_US}")]
pub struct InvalidPulse(pub u32);

/// A pulse width in microseconds, guaranteed to lie in the accepted envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PwmPulse(u16);

impl PwmPulse {
    pub fn new(width_us: u32) -> Result<Self, InvalidPulse> {
        if (PWM_MIN_US as u32..=PWM_MAX_US as u32).contains(&width_us) {
            Ok(PwmPulse(width_us as u16))
        } else {
            Err(InvalidPulse(width_us))
        }
    }

    pub fn width_us(self) -> u16 {
        self.0
    }

    /// Nominal pulse for a command.
    pub fn for_mode(mode: ControllerMode) -> Self {
        PwmPulse(match mode {
            ControllerMode::Inflation => PWM_INFLATE_US,
            ControllerMode::Deflation => PWM_DEFLATE_US,
            ControllerMode::Rest => PWM_REST_US,
        })
    }
}

pub fn decode_pwm(pulse: PwmPulse) -> ControllerMode {
    match pulse.0 {
        w if w < DEFLATE_BELOW_US => ControllerMode::Deflation,
        w if w <= INFLATE_ABOVE_US => ControllerMode::Rest,
        _ => ControllerMode::Inflation,
    }
}

/// Decodes a raw width, mapping invalid pulses to the rest failsafe.
pub fn decode_raw(width_us: u32) -> (ControllerMode, bool) {
    match PwmPulse::new(width_us) {
        Ok(p) => (decode_pwm(p), true),
        Err(_) => (ControllerMode::Rest, false),
    }
}

/// Valve pair and pump gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AirflowState {
    pub valve_inflate: bool,
    pub valve_deflate: bool,
    pub pump_on: bool,
    pub command: ControllerMode,
}

impl Default for AirflowState {
    fn default() -> Self {
        Self::REST
    }
}

impl AirflowState {
    pub const REST: AirflowState = AirflowState {
        valve_inflate: false,
        valve_deflate: false,
        pump_on: false,
        command: ControllerMode::Rest,
    };

    /// Checks the three structural invariants.
    pub fn is_consistent(&self) -> bool {
        let exclusive = !(self.valve_inflate && self.valve_deflate);
        let rest_off =
            self.command != ControllerMode::Rest || (!self.valve_inflate && !self.valve_deflate && !self.pump_on);
        let pump_routed = !self.pump_on || (self.valve_inflate ^ self.valve_deflate);
        exclusive && rest_off && pump_routed
    }
}

/// Next airflow state. Depends only on `command` and `duty`; the current
/// state is accepted for call-site symmetry with a stateful machine.
pub fn transition(_current: AirflowState, command: ControllerMode, duty: f64) -> AirflowState {
    let pump_on = duty > 0.0;
    match command {
        ControllerMode::Inflation => AirflowState {
            valve_inflate: true,
            valve_deflate: false,
            pump_on,
            command,
        },
        ControllerMode::Deflation => AirflowState {
            valve_inflate: false,
            valve_deflate: true,
            pump_on,
            command,
        },
        ControllerMode::Rest => AirflowState::REST,
    }
}
