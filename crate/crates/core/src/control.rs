//! Feed-forward proportional pressure control.
//!
//! The proportional part maps the pressure error onto a pump duty band
//! `[p_min, p_max]`: the gain is chosen so that `u = p_max` at ambient
//! pressure and `u = p_min` at the setpoint. The feed-forward part adds a
//! term proportional to the measured pressure, `f_in * y` while inflating and
//! `y / r` while deflating. Both setpoints are signed (deflation targets a
//! vacuum), and the arithmetic stays signed throughout.
//!
//! [`HoldSupervisor`] adds the stateful part: once the error enters the hold
//! band the pump stops and both valves close; actuation resumes only when the
//! error leaves the wider resume band.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which way air is being driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerMode {
    Inflation,
    Deflation,
    Rest,
}

impl ControllerMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ControllerMode::Inflation => "inflation",
            ControllerMode::Deflation => "deflation",
            ControllerMode::Rest => "rest",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "inflation" => Some(ControllerMode::Inflation),
            "deflation" => Some(ControllerMode::Deflation),
            "rest" => Some(ControllerMode::Rest),
            _ => None,
        }
    }
}

/// Control law selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    /// Proportional term plus pressure feed-forward.
    #[serde(rename = "ffp")]
    FeedForwardProportional,
    /// Proportional term only.
    #[serde(rename = "p")]
    ProportionalOnly,
}

impl ControllerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ControllerKind::FeedForwardProportional => "ffp",
            ControllerKind::ProportionalOnly => "p",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ControlError {
    #[error("controller is undefined in rest mode")]
    RestMode,
    #[error("invalid controller parameter: {0}")]
    InvalidParams(&'static str),
}

/// Setpoints, duty band and supervisor bands. Pressures in kPa gauge, duty in
/// percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerParams {
    pub r_inflate: f64,
    pub r_deflate: f64,
    pub p_max: f64,
    pub p_min_inflate: f64,
    pub p_min_deflate: f64,
    pub f_in: f64,
    /// Error magnitude at or below which the supervisor stops actuating.
    pub hold_band: f64,
    /// Error magnitude above which a holding supervisor resumes actuating.
    pub resume_band: f64,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            r_inflate: 85.0,
            r_deflate: -25.0,
            p_max: 100.0,
            p_min_inflate: 86.0,
            p_min_deflate: 63.0,
            f_in: 0.8,
            hold_band: 2.0,
            resume_band: 3.5,
        }
    }
}

impl ControllerParams {
    pub fn validate(&self) -> Result<(), ControlError> {
        let finite = [
            self.r_inflate,
            self.r_deflate,
            self.p_max,
            self.p_min_inflate,
            self.p_min_deflate,
            self.f_in,
            self.hold_band,
            self.resume_band,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(ControlError::InvalidParams("all parameters must be finite"));
        }
        if !(self.p_max > 0.0 && self.p_max <= 100.0) {
            return Err(ControlError::InvalidParams("p_max must lie in (0, 100]"));
        }
        if !(self.p_min_inflate > 0.0 && self.p_min_inflate < self.p_max) {
            return Err(ControlError::InvalidParams("require 0 < p_min_inflate < p_max"));
        }
        if !(self.p_min_deflate > 0.0 && self.p_min_deflate < self.p_max) {
            return Err(ControlError::InvalidParams("require 0 < p_min_deflate < p_max"));
        }
        if self.r_inflate <= 0.0 {
            return Err(ControlError::InvalidParams("r_inflate must be positive"));
        }
        if self.r_deflate >= 0.0 {
            return Err(ControlError::InvalidParams("r_deflate must be negative"));
        }
        if self.hold_band <= 0.0 {
            return Err(ControlError::InvalidParams("hold_band must be positive"));
        }
        if self.resume_band <= self.hold_band {
            return Err(ControlError::InvalidParams("resume_band must exceed hold_band"));
        }
        Ok(())
    }

    /// Setpoint for the given mode.
    pub fn setpoint(&self, mode: ControllerMode) -> Result<f64, ControlError> {
        match mode {
            ControllerMode::Inflation => Ok(self.r_inflate),
            ControllerMode::Deflation => Ok(self.r_deflate),
            ControllerMode::Rest => Err(ControlError::RestMode),
        }
    }

    fn p_min(&self, mode: ControllerMode) -> Result<f64, ControlError> {
        match mode {
            ControllerMode::Inflation => Ok(self.p_min_inflate),
            ControllerMode::Deflation => Ok(self.p_min_deflate),
            ControllerMode::Rest => Err(ControlError::RestMode),
        }
    }
}

/// One evaluation of the control law. `u` and `g` are pre-clamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerOutput {
    pub error: f64,
    pub gain: f64,
    pub u: f64,
    pub g: f64,
    /// Post-clamp pump duty in `[0, p_max]`; zero while holding.
    pub duty: f64,
    pub holding: bool,
}

/// `r - y`.
#[inline]
pub fn error(setpoint: f64, pressure: f64) -> f64 {
    setpoint - pressure
}

/// Proportional gain `(p_max - p_min) / r` for the mode. Negative while
/// deflating.
pub fn proportional_gain(params: &ControllerParams, mode: ControllerMode) -> Result<f64, ControlError> {
    let r = params.setpoint(mode)?;
    if r == 0.0 {
        return Err(ControlError::InvalidParams("setpoint must be nonzero"));
    }
    Ok((params.p_max - params.p_min(mode)?) / r)
}

/// Feed-forward coefficient: `f_in` while inflating, `1 / r_deflate` while
/// deflating.
pub fn feed_forward(params: &ControllerParams, mode: ControllerMode) -> Result<f64, ControlError> {
    match mode {
        ControllerMode::Inflation => Ok(params.f_in),
        ControllerMode::Deflation => {
            if params.r_deflate == 0.0 {
                return Err(ControlError::InvalidParams("setpoint must be nonzero"));
            }
            Ok(1.0 / params.r_deflate)
        }
        ControllerMode::Rest => Err(ControlError::RestMode),
    }
}

fn evaluate(
    params: &ControllerParams,
    mode: ControllerMode,
    pressure: f64,
    feed_forward_coeff: f64,
) -> Result<ControllerOutput, ControlError> {
    let r = params.setpoint(mode)?;
    let gain = proportional_gain(params, mode)?;
    let e = error(r, pressure);
    let u = gain * e + params.p_min(mode)?;
    let g = u + feed_forward_coeff * pressure;
    let holding = e.abs() <= params.hold_band;
    let duty = if holding { 0.0 } else { g.clamp(0.0, params.p_max) };
    Ok(ControllerOutput {
        error: e,
        gain,
        u,
        g,
        duty,
        holding,
    })
}

/// Feed-forward proportional output for measured pressure `pressure`.
pub fn ffp_output(
    params: &ControllerParams,
    mode: ControllerMode,
    pressure: f64,
) -> Result<ControllerOutput, ControlError> {
    let ff = feed_forward(params, mode)?;
    evaluate(params, mode, pressure, ff)
}

/// Proportional-only baseline: identical to [`ffp_output`] with `g = u`.
pub fn p_only_output(
    params: &ControllerParams,
    mode: ControllerMode,
    pressure: f64,
) -> Result<ControllerOutput, ControlError> {
    evaluate(params, mode, pressure, 0.0)
}

pub fn rest_output() -> ControllerOutput {
    ControllerOutput {
        error: 0.0,
        gain: 0.0,
        u: 0.0,
        g: 0.0,
        duty: 0.0,
        holding: true,
    }
}

/// Dispatches on controller kind; rest mode yields [`rest_output`].
pub fn controller_output(
    kind: ControllerKind,
    params: &ControllerParams,
    mode: ControllerMode,
    pressure: f64,
) -> ControllerOutput {
    let out = match kind {
        ControllerKind::FeedForwardProportional => ffp_output(params, mode, pressure),
        ControllerKind::ProportionalOnly => p_only_output(params, mode, pressure),
    };
    out.unwrap_or_else(|_| rest_output())
}

/// Hysteretic hold around the setpoint.
///
/// Enters hold when `|e| <= hold_band`, leaves it when `|e| > resume_band`.
/// A mode change always drops the hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HoldSupervisor {
    holding: bool,
    mode: Option<ControllerMode>,
}

impl HoldSupervisor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_holding(&self) -> bool {
        self.holding
    }

    pub fn step(
        &mut self,
        kind: ControllerKind,
        params: &ControllerParams,
        mode: ControllerMode,
        pressure: f64,
    ) -> ControllerOutput {
        if self.mode != Some(mode) {
            self.mode = Some(mode);
            self.holding = false;
        }
        if mode == ControllerMode::Rest {
            self.holding = true;
            return rest_output();
        }
        let mut out = controller_output(kind, params, mode, pressure);
        let magnitude = out.error.abs();
        if self.holding {
            if magnitude > params.resume_band {
                self.holding = false;
            }
        } else if magnitude <= params.hold_band {
            self.holding = true;
        }
        out.holding = self.holding;
        out.duty = if self.holding {
            0.0
        } else {
            out.g.clamp(0.0, params.p_max)
        };
        out
    }
}
