//! Simulation core for a modular pneumatic soft gripper.
//!
//! The crate is `no_std` + `alloc`. The pieces compose bottom-up:
//!
//! - [`control`]: feed-forward proportional pump-duty law and the hold supervisor
//! - [`command`]: PWM command decoding and the valve/pump state machine
//! - [`plant`]: first-order chamber pressure model with leakage, plus the sensor
//! - [`grasp`]: pressure-to-aperture map, grasp feasibility, payload and landing
//! - [`mission`]: scripted fixed-timestep missions producing per-tick traces
//! - [`experiment`]: setpoint step-response runs and their metrics
//! - [`batch`]: seeded Monte Carlo batches over mission templates
#![no_std]
// `!(x > 0.0)` style checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod batch;
pub mod command;
pub mod control;
pub mod experiment;
pub mod grasp;
pub mod mission;
pub mod plant;
pub mod rng;

pub use command::{AirflowState, PwmPulse};
pub use control::{ControllerKind, ControllerMode, ControllerOutput, ControllerParams};
pub use grasp::{Base, GraspLimits, GraspOutcome, GraspResult, GripperGeometry, ObjectSpec, Shape};
pub use mission::{MissionError, MissionResult, MissionScript, SimConfig, TraceRecord};
pub use plant::{PlantParams, PlantState, SensorModel};
