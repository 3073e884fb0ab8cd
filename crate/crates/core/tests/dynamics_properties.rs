use abflow::dynamics::{
    detect_closed_orbit, integrate, integrate_directed, trace_separatrix, Direction,
    IntegratorConfig, TrajectoryStatus,
};
use abflow::field;
use abflow::{FlowParams, Vec2};
use proptest::prelude::*;

fn half() -> FlowParams {
    FlowParams::natural(1.0, 0.5).unwrap()
}

/// Root of `s + (1/2) ln s = (1/2)(ln(1/2) - 1)` for `s > 0` by plain
/// bisection; the loop crosses the negative y-axis at `y = -s`.
fn lower_crossing_oracle() -> f64 {
    let target = 0.5 * (0.5f64.ln() - 1.0);
    let g = |s: f64| s + 0.5 * s.ln() - target;
    let (mut lo, mut hi) = (1e-9, 0.5);
    assert!(g(lo) < 0.0 && g(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    -0.5 * (lo + hi)
}

#[test]
fn homoclinic_loop_matches_oracles() {
    let params = half();
    let sep = trace_separatrix(&params, &IntegratorConfig::for_params(&params)).unwrap();
    assert!(sep.closure_distance <= 1e-4, "{}", sep.closure_distance);
    let y = lower_crossing_oracle();
    assert!(
        (sep.lower_axis_crossing - y).abs() <= 1e-4,
        "{} vs {y}",
        sep.lower_axis_crossing
    );
    assert!((sep.loop_max_radius - 0.5).abs() <= 1e-3);
    assert_eq!(sep.winding_number, -1);
    assert!(sep.max_level_deviation <= 1e-6);
    assert_eq!(sep.unbounded_branches.len(), 2);
}

#[test]
fn loop_area_shrinks_with_flux() {
    let areas: Vec<f64> = [0.5, 0.4, 0.3, 0.2, 0.1]
        .iter()
        .map(|&delta| {
            let params = FlowParams::natural(1.0, delta).unwrap();
            trace_separatrix(&params, &IntegratorConfig::for_params(&params))
                .unwrap()
                .loop_area
        })
        .collect();
    assert!(areas.windows(2).all(|w| w[1] < w[0]), "{areas:?}");
    // the loop scales with delta/k, so the area scales like delta^2
    let ratio = areas[0] / areas[4];
    assert!((ratio - 25.0).abs() < 0.5, "{ratio}");
}

#[test]
fn interior_orbit_closes_and_exterior_does_not() {
    let params = half();
    let cfg = IntegratorConfig::for_params(&params);
    let inner = detect_closed_orbit(&params, Vec2::new(0.0, 0.25), &cfg).unwrap();
    assert!(inner.closed);
    assert!(inner.return_distance <= 1e-6);
    let traj = integrate(&params, Vec2::new(0.0, 0.25), &cfg).unwrap();
    assert_eq!(traj.status, TrajectoryStatus::ClosedOrbitDetected);
    assert!(traj.max_h_drift <= 1e-8);

    let cfg200 = IntegratorConfig {
        max_time: 200.0,
        ..cfg
    };
    let outer = detect_closed_orbit(&params, Vec2::new(0.0, 5.0), &cfg200).unwrap();
    assert!(!outer.closed);
}

#[test]
fn interior_orbits_run_clockwise() {
    let params = half();
    let cfg = IntegratorConfig::for_params(&params);
    let traj = integrate(&params, Vec2::new(0.2, 0.1), &cfg).unwrap();
    assert_eq!(traj.status, TrajectoryStatus::ClosedOrbitDetected);
    assert!(abflow::geometry::signed_area(&traj.points()) < 0.0);
}

#[test]
fn drift_falls_at_least_fourfold_when_steps_are_halved() {
    let params = half();
    let base = IntegratorConfig {
        rel_tol: 1e-6,
        abs_tol: 1e-6,
        max_step: 4e-3,
        h_drift_budget: 1.0,
        stop_on_closure: false,
        max_time: 0.5,
        ..IntegratorConfig::for_params(&params)
    };
    let halved = IntegratorConfig {
        rel_tol: base.rel_tol / 2.0,
        abs_tol: base.abs_tol / 2.0,
        max_step: base.max_step / 2.0,
        ..base
    };
    let start = Vec2::new(0.0, 0.25);
    let d1 = integrate(&params, start, &base).unwrap().max_h_drift;
    let d2 = integrate(&params, start, &halved).unwrap().max_h_drift;
    assert!(d1 > 0.0);
    assert!(d2 * 4.0 <= d1, "{d1:e} -> {d2:e}");
}

#[test]
fn drift_budget_is_respected_by_default() {
    let params = half();
    let cfg = IntegratorConfig::for_params(&params);
    for start in [
        Vec2::new(0.0, 0.25),
        Vec2::new(0.3, -0.2),
        Vec2::new(-2.0, 1.0),
        Vec2::new(0.0, -0.05),
    ] {
        let traj = integrate(&params, start, &cfg).unwrap();
        assert!(
            traj.max_h_drift <= cfg.h_drift_budget,
            "{start:?}: {}",
            traj.max_h_drift
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn samples_stay_on_initial_level(x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let params = half();
        let p0 = Vec2::new(x, y);
        prop_assume!(p0.norm() > 0.05);
        let cfg = IntegratorConfig { max_time: 20.0, ..IntegratorConfig::for_params(&params) };
        let traj = integrate(&params, p0, &cfg).unwrap();
        let h0 = field::hamiltonian(&params, p0).unwrap();
        for s in &traj.samples {
            let h = field::hamiltonian(&params, s.p).unwrap();
            prop_assert!((h - h0).abs() <= 1e-6);
        }
    }

    #[test]
    fn mirror_image_is_time_reversed(x in 0.05f64..3.0, y in -2.0f64..2.0) {
        let params = half();
        let p0 = Vec2::new(x, y);
        let cfg = IntegratorConfig {
            max_time: 5.0,
            stop_on_closure: false,
            ..IntegratorConfig::for_params(&params)
        };
        let forward = integrate(&params, p0, &cfg).unwrap();
        let backward = integrate_directed(&params, p0.mirror_x(), &cfg, Direction::Backward).unwrap();
        for s in &backward.samples {
            if let Some(q) = forward.interpolate(s.t) {
                prop_assert!(q.mirror_x().distance(s.p) <= 1e-6, "t = {}: {:?} vs {:?}", s.t, q, s.p);
            }
        }
    }
}
