use proptest::prelude::*;

use softgrip_core::command::{self, decode_pwm, transition, AirflowState, PwmPulse};
use softgrip_core::control::{ffp_output, p_only_output, ControllerMode, ControllerParams};
use softgrip_core::grasp::{self, aperture, grasp_feasible, Base, GraspLimits, GripperGeometry, ObjectSpec, Shape};
use softgrip_core::mission::{run_mission, Action, MissionScript, SimConfig};
use softgrip_core::plant::{plant_step, PlantParams, PlantState};
use softgrip_core::ControllerKind;

fn params() -> impl Strategy<Value = ControllerParams> {
    (
        1.0f64..150.0,
        -60.0f64..-1.0,
        50.0f64..=100.0,
        0.01f64..0.99,
        0.01f64..0.99,
        0.0f64..2.0,
    )
        .prop_map(|(ri, rd, pmax, fi, fd, f_in)| ControllerParams {
            r_inflate: ri,
            r_deflate: rd,
            p_max: pmax,
            p_min_inflate: pmax * fi,
            p_min_deflate: pmax * fd,
            f_in,
            ..ControllerParams::default()
        })
}

fn mode() -> impl Strategy<Value = ControllerMode> {
    prop_oneof![
        Just(ControllerMode::Inflation),
        Just(ControllerMode::Deflation),
        Just(ControllerMode::Rest)
    ]
}

proptest! {
    #[test]
    fn endpoint_identity(p in params()) {
        for m in [ControllerMode::Inflation, ControllerMode::Deflation] {
            let r = p.setpoint(m).unwrap();
            let p_min = if m == ControllerMode::Inflation { p.p_min_inflate } else { p.p_min_deflate };
            let at_zero = p_only_output(&p, m, 0.0).unwrap();
            let at_r = ffp_output(&p, m, r).unwrap();
            prop_assert!((at_zero.u - p.p_max).abs() < 1e-9);
            prop_assert!((at_r.u - p_min).abs() < 1e-9);
        }
    }

    #[test]
    fn duty_is_clamped(y in -100.0f64..300.0, inflate in any::<bool>()) {
        let p = ControllerParams::default();
        let m = if inflate { ControllerMode::Inflation } else { ControllerMode::Deflation };
        for o in [ffp_output(&p, m, y).unwrap(), p_only_output(&p, m, y).unwrap()] {
            prop_assert!((0.0..=p.p_max).contains(&o.duty));
            if o.holding {
                prop_assert_eq!(o.duty, 0.0);
            } else {
                prop_assert_eq!(o.duty, o.g.clamp(0.0, p.p_max));
            }
        }
    }

    #[test]
    fn feed_forward_dominates_while_rising(y in 0.0f64..85.0) {
        let p = ControllerParams::default();
        let f = ffp_output(&p, ControllerMode::Inflation, y).unwrap();
        let q = p_only_output(&p, ControllerMode::Inflation, y).unwrap();
        prop_assert!(f.duty >= q.duty);
    }

    #[test]
    fn controller_is_deterministic(y in -100.0f64..300.0, p in params()) {
        let a = ffp_output(&p, ControllerMode::Deflation, y).unwrap();
        let b = ffp_output(&p, ControllerMode::Deflation, y).unwrap();
        prop_assert_eq!(a.g.to_bits(), b.g.to_bits());
        prop_assert_eq!(a.duty.to_bits(), b.duty.to_bits());
    }

    #[test]
    fn transition_ignores_history(m in mode(), duty in 0.0f64..=100.0, a in mode(), da in 0.0f64..=100.0) {
        let from_rest = transition(AirflowState::REST, m, duty);
        let from_other = transition(transition(AirflowState::REST, a, da), m, duty);
        prop_assert_eq!(from_rest, from_other);
        prop_assert!(from_rest.is_consistent());
    }

    #[test]
    fn decode_partitions_envelope(w in 800u32..=2200) {
        let m = decode_pwm(PwmPulse::new(w).unwrap());
        let expected = if w < 1300 {
            ControllerMode::Deflation
        } else if w <= 1700 {
            ControllerMode::Rest
        } else {
            ControllerMode::Inflation
        };
        prop_assert_eq!(m, expected);
    }

    #[test]
    fn out_of_envelope_rejected(w in prop_oneof![0u32..800, 2201u32..100_000]) {
        prop_assert!(PwmPulse::new(w).is_err());
        prop_assert_eq!(command::decode_raw(w).0, ControllerMode::Rest);
    }

    #[test]
    fn monotone_approach_without_leak(duty in 1.0f64..=100.0, inflate in any::<bool>(), y0 in -60.0f64..120.0) {
        let p = PlantParams { k_leak: 0.0, ..PlantParams::default() };
        let m = if inflate { ControllerMode::Inflation } else { ControllerMode::Deflation };
        let a = transition(AirflowState::REST, m, duty);
        let target = if inflate { p.p_pump_in } else { p.p_pump_out };
        let mut s = PlantState { pressure: y0 };
        for _ in 0..2000 {
            let n = plant_step(s, &a, duty, &p);
            prop_assert!((target - n.pressure).abs() <= (target - s.pressure).abs());
            s = n;
        }
    }

    #[test]
    fn leak_shrinks_magnitude(y0 in -60.0f64..120.0) {
        prop_assume!(y0.abs() > 1e-6);
        let p = PlantParams::default();
        let s = plant_step(PlantState { pressure: y0 }, &AirflowState::REST, 0.0, &p);
        prop_assert!(s.pressure.abs() < y0.abs());
        prop_assert_eq!(s.pressure.signum(), y0.signum());
    }

    #[test]
    fn aperture_monotone(a in -60.0f64..120.0, b in -60.0f64..120.0, x in any::<bool>()) {
        let g = if x { GripperGeometry::x_base() } else { GripperGeometry::h_base() };
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(aperture(lo, &g) >= aperture(hi, &g));
    }

    #[test]
    fn offset_symmetry(d in 5.0f64..200.0, mass in 1.0f64..400.0, off in -100.0f64..100.0, aerial in any::<bool>(), x in any::<bool>(), sphere in any::<bool>(), ns in any::<bool>()) {
        let g = if x { GripperGeometry::x_base() } else { GripperGeometry::h_base() };
        let shape = if sphere { Shape::Sphere { diameter: d } } else { Shape::Cylinder { diameter: d, height: 50.0 } };
        let o = ObjectSpec { shape, mass, non_static_cg: ns };
        let l = GraspLimits::default();
        let a = grasp_feasible(&o, &g, &l, off, aerial);
        let b = grasp_feasible(&o, &g, &l, -off, aerial);
        prop_assert_eq!(a, b);
        if a.result == grasp::GraspResult::Success {
            prop_assert!(a.success_probability == 0.8 || a.success_probability == 1.0);
        }
    }

    #[test]
    fn ground_landing_never_fails(seed in any::<u64>(), x in any::<bool>()) {
        use rand::SeedableRng;
        let g = GripperGeometry::for_base(if x { Base::XBase } else { Base::HBase });
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        prop_assert!(grasp::landing_outcome(&g, &GraspLimits::default(), 0.0, &mut rng).unwrap());
    }
}

/// Piecewise-linear interpolation through the three aperture knots, written
/// independently of `aperture`.
fn interp_oracle(p: f64, open: f64) -> f64 {
    let knots = [(-1.0e9, open), (58.0, open), (85.0, 0.0), (1.0e9, 0.0)];
    for w in knots.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if p >= x0 && p <= x1 {
            return y0 + (y1 - y0) * (p - x0) / (x1 - x0);
        }
    }
    unreachable!()
}

#[test]
fn aperture_matches_interpolation_oracle() {
    for g in [GripperGeometry::x_base(), GripperGeometry::h_base()] {
        for i in 0..=1800 {
            let p = -60.0 + 0.1 * i as f64;
            assert!(
                (aperture(p, &g) - interp_oracle(p, g.aperture_open)).abs() < 1e-9,
                "{p}"
            );
        }
    }
    assert_eq!(interp_oracle(71.5, 145.0), 72.5);
}

#[test]
fn euler_rise_converges_to_closed_form() {
    // y(t) = p_src + (y0 - p_src) exp(-k t)
    let k = (145.0f64 / 35.0).ln() / 5.0;
    let exact = |t: f64| 120.0 + (-25.0 - 120.0) * (-k * t).exp();
    assert!((exact(5.0) - 85.0).abs() < 1e-9);
    let a = transition(AirflowState::REST, ControllerMode::Inflation, 100.0);
    for dt in [0.01, 0.001] {
        let p = PlantParams {
            k_leak: 0.0,
            dt,
            ..PlantParams::default()
        };
        let mut s = PlantState { pressure: -25.0 };
        let n = (5.0 / dt).round() as usize;
        for _ in 0..n {
            s = plant_step(s, &a, 100.0, &p);
        }
        assert!((s.pressure - exact(5.0)).abs() < 60.0 * dt, "dt {dt}: {}", s.pressure);
    }
}

#[test]
fn missions_are_bit_reproducible() {
    let obj = ObjectSpec::new(
        Shape::Cylinder {
            diameter: 65.0,
            height: 200.0,
        },
        75.0,
    );
    let script = MissionScript::new(40.0, ControllerKind::FeedForwardProportional, 99)
        .step(0.0, Action::SetPwm(1100))
        .step(
            1.0,
            Action::PlaceObject {
                object: obj,
                offset: 3.0,
            },
        )
        .step(5.0, Action::Descend)
        .step(6.0, Action::SetPwm(1900))
        .step(9.0, Action::AssertHold(30.0));
    let mut cfg = SimConfig::new(GripperGeometry::h_base());
    cfg.sensor.noise_sd = 0.5;
    let a = run_mission(&script, &cfg).unwrap();
    let b = run_mission(&script, &cfg).unwrap();
    assert_eq!(a.trace.len(), b.trace.len());
    for (x, y) in a.trace.iter().zip(&b.trace) {
        assert_eq!(x.pressure.to_bits(), y.pressure.to_bits());
        assert_eq!(x.duty.to_bits(), y.duty.to_bits());
        assert_eq!(x, y);
    }
    for w in a.trace.windows(2) {
        assert!((w[1].t - w[0].t - cfg.plant.dt).abs() < 1e-12);
    }
    let mut other = script.clone();
    other.seed = 100;
    let c = run_mission(&other, &cfg).unwrap();
    assert_ne!(a.trace, c.trace);
}

#[test]
fn hold_semantics_follow_onset() {
    // AssertHold passes iff grasp succeeded and pressure stayed >= close_onset
    let obj = ObjectSpec::new(
        Shape::Cylinder {
            diameter: 65.0,
            height: 200.0,
        },
        100.0,
    );
    let base = MissionScript::new(60.0, ControllerKind::FeedForwardProportional, 1)
        .step(0.0, Action::SetPwm(1100))
        .step(
            1.0,
            Action::PlaceObject {
                object: obj,
                offset: 0.0,
            },
        )
        .step(5.0, Action::Descend)
        .step(6.0, Action::SetPwm(1900))
        .step(15.0, Action::AssertHold(30.0));
    let cfg = SimConfig::new(GripperGeometry::h_base());
    let ok = run_mission(&base, &cfg).unwrap();
    assert!(ok.result.outcome.is_success());
    let window = ok.trace.iter().filter(|r| r.t >= 15.0 && r.t <= 45.0);
    assert!(window.clone().all(|r| r.pressure >= 58.0));

    // release mid-window
    let released = base.clone().step(30.0, Action::SetPwm(1100));
    let r = run_mission(&released, &cfg).unwrap();
    assert!(!r.result.outcome.is_success());
}
