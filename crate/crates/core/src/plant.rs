//! First-order pneumatic chamber with leakage, and the pressure sensor.
//!
//! With one valve routed the chamber relaxes toward the pump's limit
//! pressure at a rate scaled by duty; leakage pulls it toward ambient at all
//! times:
//!
//! ```text
//! dy/dt = k_pump * (duty / 100) * (p_src - y) - k_leak * y
//! ```
//!
//! integrated with explicit Euler at `dt`.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::command::AirflowState;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum PlantError {
    #[error("invalid plant parameter: {0}")]
    InvalidParams(&'static str),
    #[error("target pressure {target} kPa is not between start {start} kPa and supply {supply} kPa")]
    InvalidGeometry { start: f64, target: f64, supply: f64 },
    #[error("rise time must be positive")]
    NonPositiveRiseTime,
}

/// 5 s from -25 to +85 kPa against a +120 kPa source.
pub fn default_k_pump() -> f64 {
    libm::log(145.0 / 35.0) / 5.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantParams {
    /// Pump limit pressure while inflating, kPa.
    pub p_pump_in: f64,
    /// Pump limit pressure while deflating, kPa.
    pub p_pump_out: f64,
    /// Approach rate at full duty, 1/s.
    pub k_pump: f64,
    /// Leak rate toward ambient, 1/s.
    pub k_leak: f64,
    /// Integration step, s.
    pub dt: f64,
    /// Chamber pressure at t = 0, kPa.
    pub initial_pressure: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            p_pump_in: 120.0,
            p_pump_out: -60.0,
            k_pump: default_k_pump(),
            k_leak: 0.01,
            dt: 0.01,
            initial_pressure: 0.0,
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<(), PlantError> {
        if !(self.p_pump_out < 0.0 && 0.0 < self.p_pump_in) {
            return Err(PlantError::InvalidParams("require p_pump_out < 0 < p_pump_in"));
        }
        if !(self.k_pump > 0.0 && self.k_pump.is_finite()) {
            return Err(PlantError::InvalidParams("k_pump must be positive"));
        }
        if !(self.k_leak >= 0.0 && self.k_leak.is_finite()) {
            return Err(PlantError::InvalidParams("k_leak must be non-negative"));
        }
        if !(self.dt > 0.0 && self.dt <= 0.1) {
            return Err(PlantError::InvalidParams("dt must lie in (0, 0.1]"));
        }
        if !(self.initial_pressure >= self.p_pump_out && self.initial_pressure <= self.p_pump_in) {
            return Err(PlantError::InvalidParams("initial_pressure outside pump limits"));
        }
        Ok(())
    }
}

/// Chamber gauge pressure, kPa.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantState {
    pub pressure: f64,
}

pub fn plant_step(state: PlantState, airflow: &AirflowState, duty: f64, params: &PlantParams) -> PlantState {
    let y = state.pressure;
    let drive = (duty / 100.0) * params.k_pump;
    let pump = if airflow.valve_inflate {
        drive * (params.p_pump_in - y)
    } else if airflow.valve_deflate {
        drive * (params.p_pump_out - y)
    } else {
        0.0
    };
    let dy = pump - params.k_leak * y;
    PlantState {
        pressure: (y + params.dt * dy).clamp(params.p_pump_out, params.p_pump_in),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorModel {
    pub range_low: f64,
    pub range_high: f64,
    /// Standard deviation of additive gaussian noise, kPa.
    pub noise_sd: f64,
}

impl Default for SensorModel {
    fn default() -> Self {
        Self {
            range_low: -100.0,
            range_high: 300.0,
            noise_sd: 0.0,
        }
    }
}

impl SensorModel {
    pub fn validate(&self) -> Result<(), PlantError> {
        if !(self.range_low < self.range_high) {
            return Err(PlantError::InvalidParams("sensor range_low must be below range_high"));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(PlantError::InvalidParams("sensor noise_sd must be non-negative"));
        }
        Ok(())
    }
}

/// Reads the chamber pressure. Draws from `rng` only when noise is enabled.
pub fn read_sensor<R: Rng + ?Sized>(state: PlantState, sensor: &SensorModel, rng: &mut R) -> f64 {
    let noise = if sensor.noise_sd > 0.0 {
        // noise_sd is validated positive and finite
        Normal::new(0.0, sensor.noise_sd).map(|n| n.sample(rng)).unwrap_or(0.0)
    } else {
        0.0
    };
    (state.pressure + noise).clamp(sensor.range_low, sensor.range_high)
}

/// Rate coefficient that takes a first-order approach from `start` to
/// `target` in `t_rise` seconds against source pressure `source`.
pub fn calibrate_k_pump(t_rise: f64, start: f64, target: f64, source: f64) -> Result<f64, PlantError> {
    if !(t_rise > 0.0) {
        return Err(PlantError::NonPositiveRiseTime);
    }
    let bad = PlantError::InvalidGeometry {
        start,
        target,
        supply: source,
    };
    if start == source {
        return Err(bad);
    }
    let (lo, hi) = if start < source {
        (start, source)
    } else {
        (source, start)
    };
    let between = if start < source {
        target >= lo && target < hi
    } else {
        target > lo && target <= hi
    };
    if !between {
        return Err(bad);
    }
    Ok(libm::log((source - start) / (source - target)) / t_rise)
}
