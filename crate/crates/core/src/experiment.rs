//! Setpoint step-response runs.
//!
//! A profile is a list of `(start time, setpoint)` pairs. Positive setpoints
//! inflate, negative ones deflate, zero rests. Each segment is scored on:
//!
//! - rise time: 10 % to 90 % of the step from the segment's starting pressure
//! - settle time: from segment start to the first entry into the supervisor
//!   hold that then lasts at least one second
//! - steady-state error: mean `|r - y|` over the last 20 % of the segment

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::command::PwmPulse;
use crate::control::{ControllerKind, ControllerMode, ControllerParams};
use crate::mission::{tick_count, MissionError, SimConfig, Simulator, TraceRecord};

/// Minimum continuous hold for a segment to count as settled, seconds.
pub const SETTLE_DWELL_S: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentMetrics {
    pub start_s: f64,
    pub mode: ControllerMode,
    pub setpoint: f64,
    pub rise_time_s: Option<f64>,
    pub settle_time_s: Option<f64>,
    pub steady_state_error_kpa: f64,
}

fn first_crossing(rows: &[TraceRecord], level: f64, rising: bool) -> Option<f64> {
    rows.iter()
        .find(|r| {
            if rising {
                r.pressure >= level
            } else {
                r.pressure <= level
            }
        })
        .map(|r| r.t)
}

/// Scores one constant-setpoint stretch of trace.
pub fn segment_metrics(rows: &[TraceRecord], mode: ControllerMode, setpoint: f64, dt: f64) -> SegmentMetrics {
    let Some(first) = rows.first() else {
        return SegmentMetrics {
            start_s: 0.0,
            mode,
            setpoint,
            rise_time_s: None,
            settle_time_s: None,
            steady_state_error_kpa: 0.0,
        };
    };
    let t0 = first.t;
    let y0 = first.pressure;
    let step = setpoint - y0;

    let rise_time_s = if mode != ControllerMode::Rest && step != 0.0 {
        let rising = step > 0.0;
        let t10 = first_crossing(rows, y0 + 0.1 * step, rising);
        let t90 = first_crossing(rows, y0 + 0.9 * step, rising);
        match (t10, t90) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        }
    } else {
        None
    };

    let settle_time_s = if mode != ControllerMode::Rest {
        let dwell = libm::round(SETTLE_DWELL_S / dt) as usize;
        let mut run_start: Option<usize> = None;
        let mut found = None;
        for (i, r) in rows.iter().enumerate() {
            if r.is_holding() {
                let s = *run_start.get_or_insert(i);
                if i - s >= dwell {
                    found = Some(rows[s].t - t0);
                    break;
                }
            } else {
                run_start = None;
            }
        }
        found
    } else {
        None
    };

    let tail = (rows.len() / 5).max(1);
    let tail_rows = &rows[rows.len() - tail..];
    let steady_state_error_kpa =
        tail_rows.iter().map(|r| (setpoint - r.pressure).abs()).sum::<f64>() / tail_rows.len() as f64;

    SegmentMetrics {
        start_s: t0,
        mode,
        setpoint,
        rise_time_s,
        settle_time_s,
        steady_state_error_kpa,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepProfile {
    /// `(start time s, setpoint kPa)`, strictly increasing in time.
    pub setpoints: Vec<(f64, f64)>,
    pub duration: f64,
}

impl StepProfile {
    /// Rest at ambient, deflate to -25 kPa, inflate to +85 kPa.
    pub fn standard() -> Self {
        Self {
            setpoints: vec![(0.0, 0.0), (2.0, -25.0), (12.0, 85.0)],
            duration: 32.0,
        }
    }

    pub fn deflate_only() -> Self {
        Self {
            setpoints: vec![(0.0, 0.0), (2.0, -25.0)],
            duration: 12.0,
        }
    }

    pub fn inflate_only() -> Self {
        Self {
            setpoints: vec![(0.0, 85.0)],
            duration: 20.0,
        }
    }

    pub fn validate(&self) -> Result<(), MissionError> {
        let bad = |m| Err(MissionError::InvalidScript(m));
        if self.setpoints.is_empty() {
            return bad(alloc::string::String::from("setpoint sequence is empty"));
        }
        let mut prev: Option<f64> = None;
        for &(t, r) in &self.setpoints {
            if !(t.is_finite() && t >= 0.0 && r.is_finite()) {
                return bad(format!("setpoint ({t}, {r}) is not finite"));
            }
            if prev.is_some_and(|p| t <= p) {
                return bad(format!("setpoint times must be strictly increasing at {t}"));
            }
            prev = Some(t);
        }
        if prev.is_some_and(|p| self.duration < p) {
            return bad(format!("duration {} shorter than last setpoint time", self.duration));
        }
        Ok(())
    }
}

fn mode_for(setpoint: f64) -> ControllerMode {
    if setpoint > 0.0 {
        ControllerMode::Inflation
    } else if setpoint < 0.0 {
        ControllerMode::Deflation
    } else {
        ControllerMode::Rest
    }
}

fn params_for(base: &ControllerParams, setpoint: f64) -> ControllerParams {
    let mut p = *base;
    match mode_for(setpoint) {
        ControllerMode::Inflation => p.r_inflate = setpoint,
        ControllerMode::Deflation => p.r_deflate = setpoint,
        ControllerMode::Rest => {}
    }
    p
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResponse {
    pub controller: ControllerKind,
    pub trace: Vec<TraceRecord>,
    pub segments: Vec<SegmentMetrics>,
}

impl StepResponse {
    /// Metrics of the first segment in `mode`.
    pub fn segment(&self, mode: ControllerMode) -> Option<&SegmentMetrics> {
        self.segments.iter().find(|s| s.mode == mode)
    }
}

pub fn step_response_experiment(
    controller: ControllerKind,
    profile: &StepProfile,
    config: &SimConfig,
    seed: u64,
) -> Result<StepResponse, MissionError> {
    config.validate()?;
    profile.validate()?;
    for &(_, r) in &profile.setpoints {
        params_for(&config.controller, r).validate()?;
    }
    let dt = config.plant.dt;
    let ticks = tick_count(profile.duration, dt);
    let starts: Vec<usize> = profile
        .setpoints
        .iter()
        .map(|&(t, _)| libm::ceil(t / dt - 1e-9).max(0.0) as usize)
        .collect();

    let mut sim = Simulator::new(*config, controller, seed);
    let mut trace = Vec::with_capacity(ticks);
    let mut segment: Option<usize> = None;
    let mut params = config.controller;
    let mut mode = ControllerMode::Rest;

    for n in 0..ticks {
        let mut event = None;
        let due = starts.iter().rposition(|&s| s <= n);
        if due != segment {
            segment = due;
            if let Some(i) = due {
                let r = profile.setpoints[i].1;
                params = params_for(&config.controller, r);
                mode = mode_for(r);
                sim.reset_supervisor();
                event = Some(format!("setpoint:{r}"));
            }
        }
        let tick = sim.tick(mode, &params);
        trace.push(TraceRecord {
            t: n as f64 * dt,
            pwm: PwmPulse::for_mode(mode).width_us() as u32,
            command: mode,
            valve_inflate: tick.airflow.valve_inflate,
            valve_deflate: tick.airflow.valve_deflate,
            pump_on: tick.airflow.pump_on,
            duty: tick.duty,
            pressure: tick.pressure,
            aperture: crate::grasp::aperture(tick.pressure, &config.gripper),
            event,
        });
    }

    let segments = profile
        .setpoints
        .iter()
        .enumerate()
        .map(|(i, &(_, r))| {
            let lo = starts[i].min(trace.len());
            let hi = starts.get(i + 1).copied().unwrap_or(trace.len()).min(trace.len());
            segment_metrics(&trace[lo..hi], mode_for(r), r, dt)
        })
        .collect();

    Ok(StepResponse {
        controller,
        trace,
        segments,
    })
}
