//! Scripted missions on a fixed timestep.
//!
//! Each tick runs, in order: scheduled script actions, sensor read, PWM
//! decode, supervised control law, airflow transition, trace record, plant
//! step. The recorded pressure is the one the controller saw before the
//! plant advanced.
//!
//! The vehicle itself is not simulated. `Descend` evaluates the approach
//! against the placed object, `Ascend` puts the vehicle in the air with
//! whatever it holds, and `Land` rolls a landing on the given incline.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::command::{self, AirflowState, PWM_REST_US};
use crate::control::{ControlError, ControllerKind, ControllerMode, ControllerParams, HoldSupervisor};
use crate::experiment::{segment_metrics, SegmentMetrics};
use crate::grasp::{self, GraspError, GraspLimits, GraspResult, GripperGeometry, ObjectSpec};
use crate::plant::{self, PlantError, PlantParams, PlantState, SensorModel};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MissionError {
    #[error("invalid mission script: {0}")]
    InvalidScript(String),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error(transparent)]
    Grasp(#[from] GraspError),
}

/// All module parameters for one simulated gripper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub controller: ControllerParams,
    pub plant: PlantParams,
    pub sensor: SensorModel,
    pub gripper: GripperGeometry,
    pub limits: GraspLimits,
}

impl SimConfig {
    pub fn new(gripper: GripperGeometry) -> Self {
        Self {
            controller: ControllerParams::default(),
            plant: PlantParams::default(),
            sensor: SensorModel::default(),
            gripper,
            limits: GraspLimits::default(),
        }
    }

    pub fn validate(&self) -> Result<(), MissionError> {
        self.controller.validate()?;
        self.plant.validate()?;
        self.sensor.validate()?;
        self.gripper.validate()?;
        self.limits.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Action {
    /// Raw pulse width in µs; out-of-envelope widths fall back to rest.
    SetPwm(u32),
    PlaceObject {
        object: ObjectSpec,
        offset: f64,
    },
    Descend,
    Ascend,
    /// Require the object to stay gripped for this many seconds.
    AssertHold(f64),
    /// Land on an incline, degrees.
    Land(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub at: f64,
    pub action: Action,
}

impl Step {
    pub fn new(at: f64, action: Action) -> Self {
        Self { at, action }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionScript {
    pub steps: Vec<Step>,
    pub duration: f64,
    pub controller: ControllerKind,
    pub seed: u64,
    /// Vehicle starts in the air rather than on a bench.
    pub airborne: bool,
}

impl MissionScript {
    pub fn new(duration: f64, controller: ControllerKind, seed: u64) -> Self {
        Self {
            steps: Vec::new(),
            duration,
            controller,
            seed,
            airborne: false,
        }
    }

    pub fn step(mut self, at: f64, action: Action) -> Self {
        self.steps.push(Step::new(at, action));
        self
    }

    pub fn validate(&self) -> Result<(), MissionError> {
        let bad = |m: String| Err(MissionError::InvalidScript(m));
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return bad(format!("duration {} must be finite and non-negative", self.duration));
        }
        let mut last: Option<f64> = None;
        for (i, s) in self.steps.iter().enumerate() {
            if !(s.at.is_finite() && s.at >= 0.0) {
                return bad(format!("step {i}: time {} must be finite and non-negative", s.at));
            }
            if let Some(prev) = last {
                if s.at <= prev {
                    return bad(format!("step {i}: time {} not after previous step at {prev}", s.at));
                }
            }
            last = Some(s.at);
            match s.action {
                Action::PlaceObject { object, offset } => {
                    object.validate()?;
                    if !offset.is_finite() {
                        return bad(format!("step {i}: offset must be finite"));
                    }
                }
                Action::AssertHold(d) => {
                    if !(d > 0.0 && d.is_finite()) {
                        return bad(format!("step {i}: hold duration must be positive"));
                    }
                    if s.at + d > self.duration + 1e-9 {
                        return bad(format!("step {i}: hold window ends after mission duration"));
                    }
                }
                Action::Land(incline) => {
                    if !(0.0..=45.0).contains(&incline) {
                        return Err(GraspError::InclineOutOfRange(incline).into());
                    }
                }
                Action::SetPwm(_) | Action::Descend | Action::Ascend => {}
            }
        }
        if let Some(t) = last {
            if self.duration < t {
                return bad(format!("duration {} shorter than last step at {t}", self.duration));
            }
        }
        Ok(())
    }
}

/// One row of telemetry.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub pwm: u32,
    /// Decoded command, independent of whether the supervisor is holding.
    pub command: ControllerMode,
    pub valve_inflate: bool,
    pub valve_deflate: bool,
    pub pump_on: bool,
    pub duty: f64,
    pub pressure: f64,
    pub aperture: f64,
    pub event: Option<String>,
}

impl TraceRecord {
    /// The supervisor is holding: a command is active but both valves are shut.
    pub fn is_holding(&self) -> bool {
        self.command != ControllerMode::Rest && !self.valve_inflate && !self.valve_deflate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FailureReason {
    Grasp(GraspResult),
    /// Grasp was feasible but the object slipped out.
    Dropped,
    /// A hold window was asserted with no successful grasp in place.
    NoGrasp,
    /// Pressure fell below the closing onset inside a hold window.
    HoldViolated,
    PayloadExceeded,
    LandingFailed,
    /// Landing was attempted with the gripper not fully open.
    LandedClosed,
}

impl FailureReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            FailureReason::Grasp(r) => r.as_str(),
            FailureReason::Dropped => "dropped",
            FailureReason::NoGrasp => "no_grasp",
            FailureReason::HoldViolated => "hold_violated",
            FailureReason::PayloadExceeded => "payload_exceeded",
            FailureReason::LandingFailed => "landing_failed",
            FailureReason::LandedClosed => "landed_closed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissionOutcome {
    Success,
    Failure(FailureReason),
}

impl MissionOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, MissionOutcome::Success)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissionMetrics {
    pub rise_time_s: Option<f64>,
    pub settle_time_s: Option<f64>,
    pub steady_state_error_kpa: f64,
    /// At least one hold window was asserted and all of them passed.
    pub hold_satisfied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionResult {
    pub outcome: MissionOutcome,
    pub metrics: MissionMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionRun {
    pub trace: Vec<TraceRecord>,
    pub result: MissionResult,
}

/// Number of records a run of `duration` seconds emits, including t = 0 and
/// t = duration.
pub fn tick_count(duration: f64, dt: f64) -> usize {
    libm::round(duration / dt) as usize + 1
}

fn tick_of(at: f64, dt: f64) -> usize {
    libm::ceil(at / dt - 1e-9).max(0.0) as usize
}

/// Controller, valves and chamber advanced together one tick at a time.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub config: SimConfig,
    pub kind: ControllerKind,
    supervisor: HoldSupervisor,
    airflow: AirflowState,
    state: PlantState,
    sensor_rng: ChaCha8Rng,
}

/// What one tick did, before the plant advanced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tick {
    pub airflow: AirflowState,
    pub duty: f64,
    pub pressure: f64,
    pub holding: bool,
}

impl Simulator {
    pub fn new(config: SimConfig, kind: ControllerKind, seed: u64) -> Self {
        Self {
            config,
            kind,
            supervisor: HoldSupervisor::new(),
            airflow: AirflowState::REST,
            state: PlantState {
                pressure: config.plant.initial_pressure,
            },
            sensor_rng: rng::stream(seed, Stream::Sensor),
        }
    }

    pub fn pressure(&self) -> f64 {
        self.state.pressure
    }

    pub fn aperture(&self) -> f64 {
        grasp::aperture(self.state.pressure, &self.config.gripper)
    }

    pub fn reset_supervisor(&mut self) {
        self.supervisor = HoldSupervisor::new();
    }

    pub fn tick(&mut self, mode: ControllerMode, params: &ControllerParams) -> Tick {
        let measured = plant::read_sensor(self.state, &self.config.sensor, &mut self.sensor_rng);
        let out = self.supervisor.step(self.kind, params, mode, measured);
        let routed = if out.holding { ControllerMode::Rest } else { mode };
        self.airflow = command::transition(self.airflow, routed, out.duty);
        let tick = Tick {
            airflow: self.airflow,
            duty: out.duty,
            pressure: self.state.pressure,
            holding: out.holding,
        };
        self.state = plant::plant_step(self.state, &self.airflow, out.duty, &self.config.plant);
        tick
    }
}

struct HoldWindow {
    end_tick: usize,
    pressure_ok: bool,
}

#[derive(Clone, Copy)]
struct Grip {
    object: ObjectSpec,
    result: GraspResult,
    secured: bool,
}

fn fail(slot: &mut Option<FailureReason>, r: FailureReason) {
    if slot.is_none() {
        *slot = Some(r);
    }
}

fn push_event(slot: &mut Option<String>, ev: &str) {
    match slot {
        Some(s) => {
            s.push(';');
            s.push_str(ev);
        }
        None => *slot = Some(String::from(ev)),
    }
}

/// Runs a script, returning the full trace and the outcome.
pub fn run_mission(script: &MissionScript, config: &SimConfig) -> Result<MissionRun, MissionError> {
    let (trace, result) = execute(script, config, true)?;
    Ok(MissionRun { trace, result })
}

/// Same simulation as [`run_mission`] without keeping the trace.
pub fn mission_outcome(script: &MissionScript, config: &SimConfig) -> Result<MissionResult, MissionError> {
    execute(script, config, false).map(|(_, r)| r)
}

fn execute(
    script: &MissionScript,
    config: &SimConfig,
    record_all: bool,
) -> Result<(Vec<TraceRecord>, MissionResult), MissionError> {
    config.validate()?;
    script.validate()?;

    let dt = config.plant.dt;
    let ticks = tick_count(script.duration, dt);
    let geom = config.gripper;
    let mut sim = Simulator::new(*config, script.controller, script.seed);
    let mut events_rng = rng::stream(script.seed, Stream::Events);

    let mut pwm = PWM_REST_US as u32;
    let mut airborne = script.airborne;
    let mut placed: Option<(ObjectSpec, f64)> = None;
    let mut grip: Option<Grip> = None;
    let mut windows: Vec<HoldWindow> = Vec::new();
    let mut holds_asserted = 0usize;
    let mut holds_passed = 0usize;
    let mut failure: Option<FailureReason> = None;

    // last actuating segment, for metrics
    let mut segment_start = 0usize;
    let mut segment_mode = ControllerMode::Rest;

    let mut trace: Vec<TraceRecord> = Vec::with_capacity(if record_all { ticks } else { 0 });
    let mut segment_rows: Vec<TraceRecord> = Vec::new();
    let mut next_step = 0usize;

    for n in 0..ticks {
        let t = n as f64 * dt;
        let mut event: Option<String> = None;
        let aperture_now = sim.aperture();

        while next_step < script.steps.len() && tick_of(script.steps[next_step].at, dt) <= n {
            let step = script.steps[next_step];
            next_step += 1;
            match step.action {
                Action::SetPwm(width) => {
                    pwm = width;
                    let (mode, valid) = command::decode_raw(width);
                    if !valid {
                        push_event(&mut event, "pwm_invalid");
                    }
                    push_event(&mut event, &format!("set_pwm:{}", mode.as_str()));
                    if mode != ControllerMode::Rest {
                        segment_start = n;
                        segment_mode = mode;
                        segment_rows.clear();
                    }
                }
                Action::PlaceObject { object, offset } => {
                    placed = Some((object, offset));
                    grip = None;
                    push_event(&mut event, "place_object");
                }
                Action::Descend => match placed {
                    None => push_event(&mut event, "descend:no_object"),
                    Some((object, offset)) => {
                        let approach = GripperGeometry {
                            aperture_open: aperture_now,
                            ..geom
                        };
                        let outcome = grasp::grasp_feasible(&object, &approach, &config.limits, offset, airborne);
                        let secured = if outcome.result == GraspResult::Success {
                            let draw: f64 = events_rng.random();
                            draw < outcome.success_probability
                        } else {
                            fail(&mut failure, FailureReason::Grasp(outcome.result));
                            false
                        };
                        grip = Some(Grip {
                            object,
                            result: outcome.result,
                            secured,
                        });
                        push_event(&mut event, &format!("descend:{}", outcome.result.as_str()));
                    }
                },
                Action::Ascend => {
                    airborne = true;
                    if let Some(g) = grip {
                        if g.result == GraspResult::Success
                            && g.secured
                            && !grasp::payload_check(&g.object, &config.limits)
                        {
                            fail(&mut failure, FailureReason::PayloadExceeded);
                            push_event(&mut event, "ascend:payload_exceeded");
                            continue;
                        }
                    }
                    push_event(&mut event, "ascend");
                }
                Action::AssertHold(d) => {
                    holds_asserted += 1;
                    windows.push(HoldWindow {
                        end_tick: n + libm::round(d / dt) as usize,
                        pressure_ok: true,
                    });
                    push_event(&mut event, "hold_start");
                }
                Action::Land(incline) => {
                    airborne = false;
                    if aperture_now < geom.aperture_open {
                        fail(&mut failure, FailureReason::LandedClosed);
                        push_event(&mut event, "land:closed");
                    } else {
                        let ok = grasp::landing_outcome(&geom, &config.limits, incline, &mut events_rng)?;
                        if !ok {
                            fail(&mut failure, FailureReason::LandingFailed);
                        }
                        push_event(&mut event, if ok { "land:ok" } else { "land:failed" });
                    }
                }
            }
        }

        let (mode, _) = command::decode_raw(pwm);
        let tick = sim.tick(mode, &config.controller);

        for w in windows.iter_mut() {
            if tick.pressure < geom.close_onset {
                w.pressure_ok = false;
            }
        }
        let mut i = 0;
        while i < windows.len() {
            if windows[i].end_tick <= n {
                let w = windows.swap_remove(i);
                let verdict = match grip {
                    None => Some(FailureReason::NoGrasp),
                    Some(g) if g.result != GraspResult::Success => Some(FailureReason::NoGrasp),
                    Some(g) if !g.secured => Some(FailureReason::Dropped),
                    Some(_) if !w.pressure_ok => Some(FailureReason::HoldViolated),
                    Some(_) => None,
                };
                match verdict {
                    Some(r) => {
                        fail(&mut failure, r);
                        push_event(&mut event, &format!("hold_end:{}", r.as_str()));
                    }
                    None => {
                        holds_passed += 1;
                        push_event(&mut event, "hold_end:ok");
                    }
                }
            } else {
                i += 1;
            }
        }

        let row = TraceRecord {
            t,
            pwm,
            command: mode,
            valve_inflate: tick.airflow.valve_inflate,
            valve_deflate: tick.airflow.valve_deflate,
            pump_on: tick.airflow.pump_on,
            duty: tick.duty,
            pressure: tick.pressure,
            aperture: grasp::aperture(tick.pressure, &geom),
            event,
        };
        if n >= segment_start {
            segment_rows.push(row.clone());
        }
        if record_all {
            trace.push(row);
        }
    }

    let setpoint = config.controller.setpoint(segment_mode).unwrap_or(0.0);
    let seg: SegmentMetrics = segment_metrics(&segment_rows, segment_mode, setpoint, dt);
    let metrics = MissionMetrics {
        rise_time_s: seg.rise_time_s,
        settle_time_s: seg.settle_time_s,
        steady_state_error_kpa: seg.steady_state_error_kpa,
        hold_satisfied: holds_asserted > 0 && holds_passed == holds_asserted,
    };
    let outcome = match failure {
        None => MissionOutcome::Success,
        Some(r) => MissionOutcome::Failure(r),
    };
    Ok((trace, MissionResult { outcome, metrics }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::command::{PWM_DEFLATE_US, PWM_INFLATE_US};
    use crate::grasp::Shape;

    fn h_config() -> SimConfig {
        SimConfig::new(GripperGeometry::h_base())
    }

    fn bottle(mass: f64) -> ObjectSpec {
        ObjectSpec::new(
            Shape::Cylinder {
                diameter: 65.0,
                height: 200.0,
            },
            mass,
        )
    }

    fn aerial_grasp(mass: f64) -> MissionScript {
        let mut s = MissionScript::new(50.0, ControllerKind::FeedForwardProportional, 1)
            .step(0.0, Action::SetPwm(PWM_DEFLATE_US as u32))
            .step(
                1.0,
                Action::PlaceObject {
                    object: bottle(mass),
                    offset: 0.0,
                },
            )
            .step(10.0, Action::Descend)
            .step(11.0, Action::SetPwm(PWM_INFLATE_US as u32))
            .step(18.0, Action::AssertHold(30.0));
        s.airborne = true;
        s
    }

    #[test]
    fn empty_script_stays_at_rest() {
        let s = MissionScript::new(5.0, ControllerKind::FeedForwardProportional, 0);
        let run = run_mission(&s, &h_config()).unwrap();
        assert_eq!(run.trace.len(), 501);
        assert!(run.trace.iter().all(|r| r.pressure == 0.0 && r.aperture == 145.0));
        assert_eq!(run.result.outcome, MissionOutcome::Success);
        assert!(!run.result.metrics.hold_satisfied);
    }

    #[test]
    fn deflate_then_inflate_timing() {
        let s = MissionScript::new(30.0, ControllerKind::FeedForwardProportional, 0)
            .step(0.0, Action::SetPwm(1100))
            .step(10.0, Action::SetPwm(1900));
        let run = run_mission(&s, &h_config()).unwrap();
        let at = |t: f64| &run.trace[libm::round(t / 0.01) as usize];
        assert!(at(9.99).pressure < -21.0);
        let onset = run.trace.iter().position(|r| r.t > 10.0 && r.pressure > 58.0).unwrap();
        assert!(run.trace[onset].aperture < 145.0);
        let reach = run.trace.iter().find(|r| r.t > 10.0 && r.is_holding()).unwrap();
        assert!((reach.t - 10.0 - 5.0).abs() < 1.0, "{}", reach.t);
        assert!(run.result.metrics.settle_time_s.is_some());
    }

    #[test]
    fn light_object_blows_away() {
        let run = run_mission(&aerial_grasp(65.0), &h_config()).unwrap();
        assert_eq!(
            run.result.outcome,
            MissionOutcome::Failure(FailureReason::Grasp(GraspResult::BlowAway))
        );
    }

    #[test]
    fn bottle_grasp_holds() {
        let run = run_mission(&aerial_grasp(75.0), &h_config()).unwrap();
        assert_eq!(run.result.outcome, MissionOutcome::Success);
        assert!(run.result.metrics.hold_satisfied);
    }

    #[test]
    fn hold_without_inflation_fails() {
        let mut s = aerial_grasp(75.0);
        s.steps.retain(|st| st.action != Action::SetPwm(PWM_INFLATE_US as u32));
        let r = mission_outcome(&s, &h_config()).unwrap();
        assert_eq!(r.outcome, MissionOutcome::Failure(FailureReason::HoldViolated));
    }

    #[test]
    fn hold_with_nothing_placed() {
        let s = MissionScript::new(10.0, ControllerKind::FeedForwardProportional, 0).step(1.0, Action::AssertHold(2.0));
        let r = mission_outcome(&s, &h_config()).unwrap();
        assert_eq!(r.outcome, MissionOutcome::Failure(FailureReason::NoGrasp));
    }

    #[test]
    fn heavy_payload_fails_on_ascend() {
        let s = MissionScript::new(40.0, ControllerKind::FeedForwardProportional, 0)
            .step(0.0, Action::SetPwm(1100))
            .step(
                0.5,
                Action::PlaceObject {
                    object: bottle(190.0),
                    offset: 0.0,
                },
            )
            .step(1.0, Action::Descend)
            .step(2.0, Action::SetPwm(1900))
            .step(9.0, Action::Ascend);
        assert_eq!(
            mission_outcome(&s, &h_config()).unwrap().outcome,
            MissionOutcome::Success
        );
        let x = SimConfig::new(GripperGeometry::x_base());
        let s2 = MissionScript {
            steps: s
                .steps
                .iter()
                .map(|st| match st.action {
                    Action::PlaceObject { offset, .. } => Step::new(
                        st.at,
                        Action::PlaceObject {
                            object: bottle(300.0),
                            offset,
                        },
                    ),
                    _ => *st,
                })
                .collect(),
            ..s.clone()
        };
        assert_eq!(
            mission_outcome(&s2, &x).unwrap().outcome,
            MissionOutcome::Failure(FailureReason::PayloadExceeded)
        );
    }

    #[test]
    fn landing_closed_fails() {
        let s = MissionScript::new(20.0, ControllerKind::FeedForwardProportional, 0)
            .step(0.0, Action::SetPwm(1900))
            .step(10.0, Action::Land(0.0));
        assert_eq!(
            mission_outcome(&s, &h_config()).unwrap().outcome,
            MissionOutcome::Failure(FailureReason::LandedClosed)
        );
    }

    #[test]
    fn invalid_pwm_is_rest_failsafe() {
        let s = MissionScript::new(2.0, ControllerKind::FeedForwardProportional, 0).step(0.0, Action::SetPwm(2500));
        let run = run_mission(&s, &h_config()).unwrap();
        assert!(run.trace[0].event.as_deref().unwrap().contains("pwm_invalid"));
        assert!(run
            .trace
            .iter()
            .all(|r| r.command == ControllerMode::Rest && !r.pump_on));
    }

    #[test]
    fn script_validation() {
        let k = ControllerKind::FeedForwardProportional;
        let c = h_config();
        let s = MissionScript::new(10.0, k, 0)
            .step(2.0, Action::Descend)
            .step(2.0, Action::Ascend);
        assert!(matches!(run_mission(&s, &c), Err(MissionError::InvalidScript(_))));
        let s = MissionScript::new(1.0, k, 0).step(2.0, Action::Descend);
        assert!(run_mission(&s, &c).is_err());
        let s = MissionScript::new(10.0, k, 0).step(5.0, Action::AssertHold(30.0));
        assert!(run_mission(&s, &c).is_err());
        let s = MissionScript::new(10.0, k, 0).step(5.0, Action::Land(50.0));
        assert!(matches!(run_mission(&s, &c), Err(MissionError::Grasp(_))));
        let mut bad = c;
        bad.plant.dt = 0.5;
        assert!(run_mission(&MissionScript::new(1.0, k, 0), &bad).is_err());
    }

    #[test]
    fn trace_ticks_are_uniform() {
        let s = MissionScript::new(3.0, ControllerKind::ProportionalOnly, 0).step(0.0, Action::SetPwm(1900));
        let run = run_mission(&s, &h_config()).unwrap();
        for w in run.trace.windows(2) {
            assert!((w[1].t - w[0].t - 0.01).abs() < 1e-12);
        }
    }
}
