use abflow::contour::{self, circulation, LevelSelection, PortraitSpec};
use abflow::dynamics::{integrate, IntegratorConfig, TrajectoryStatus};
use abflow::field;
use abflow::geometry::hausdorff;
use abflow::{Bounds, FlowParams, Polyline, Vec2};

fn half() -> FlowParams {
    FlowParams::natural(1.0, 0.5).unwrap()
}

fn max_level_error(params: &FlowParams, curves: &[Polyline], level: f64) -> f64 {
    curves
        .iter()
        .flat_map(|c| c.points.iter())
        .map(|&p| (field::stream_function(params, p).unwrap() - level).abs())
        .fold(0.0, f64::max)
}

/// Vertex level error away from the vortex, where a fixed grid is in its
/// asymptotic regime (near the vortex psi has a log singularity and a finer
/// grid simply reaches closer to it).
fn max_level_error_beyond(
    params: &FlowParams,
    curves: &[Polyline],
    level: f64,
    radius: f64,
) -> f64 {
    curves
        .iter()
        .flat_map(|c| c.points.iter())
        .filter(|p| p.norm() >= radius)
        .map(|&p| (field::stream_function(params, p).unwrap() - level).abs())
        .fold(0.0, f64::max)
}

#[test]
fn vertices_lie_on_their_level() {
    let params = half();
    for (nx, ny) in [(40, 30), (80, 60), (400, 300)] {
        let spec = PortraitSpec::new(Bounds::new(-4.0, 4.0, -3.0, 3.0), nx, ny);
        for level in [-2.0, -1.2, -0.8, -0.5, 0.0, 0.5, 1.5] {
            let curves = contour::level_curves(&params, level, &spec).unwrap();
            assert!(!curves.is_empty(), "level {level}");
            let scale = contour::level_scale(&params, level);
            let err = max_level_error(&params, &curves, level);
            assert!(err <= 1e-3 * scale, "{nx}x{ny} level {level}: {err:e}");
        }
    }
}

#[test]
fn level_accuracy_tightens_when_grid_doubles() {
    let params = half();
    let bbox = Bounds::new(-4.0, 4.0, -3.0, 3.0);
    for level in [-2.0, -1.2, -0.8, -0.5, 0.0, 0.5, 1.5] {
        let coarse_spec = PortraitSpec::new(bbox, 80, 60);
        let coarse = contour::level_curves(&params, level, &coarse_spec).unwrap();
        let fine =
            contour::level_curves(&params, level, &PortraitSpec::new(bbox, 160, 120)).unwrap();
        let radius = 5.0 * coarse_spec.cell_diagonal();
        let e1 = max_level_error_beyond(&params, &coarse, level, radius);
        let e2 = max_level_error_beyond(&params, &fine, level, radius);
        println!("level {level}: {e1:e} -> {e2:e}");
        assert!(e1 > 0.0, "level {level}");
        assert!(e2 * 4.0 <= e1, "level {level}: {e1:e} -> {e2:e}");
    }
}

#[test]
fn closed_level_curve_matches_integrated_orbit() {
    let params = half();
    let start = Vec2::new(0.0, 0.25);
    let level = field::stream_function(&params, start).unwrap();
    let spec = PortraitSpec::new(Bounds::new(-1.0, 1.0, -1.0, 1.0), 200, 200);
    let curves = contour::level_curves(&params, level, &spec).unwrap();
    let closed: Vec<Polyline> = curves.into_iter().filter(|c| c.closed).collect();
    assert_eq!(closed.len(), 1);

    let traj = integrate(&params, start, &IntegratorConfig::for_params(&params)).unwrap();
    assert_eq!(traj.status, TrajectoryStatus::ClosedOrbitDetected);
    let orbit = Polyline::new(traj.points(), Some(level), true);
    let d = hausdorff(&closed, &[orbit]);
    assert!(d <= spec.cell_diagonal(), "{d} > {}", spec.cell_diagonal());
}

#[test]
fn portrait_is_mirror_symmetric() {
    let params = half();
    let spec = PortraitSpec::new(Bounds::new(-4.0, 4.0, -3.0, 3.0), 160, 120);
    let portrait = contour::portrait(&params, &spec).unwrap();
    for &level in &portrait.levels {
        let curves: Vec<Polyline> = portrait.curves_at(level).cloned().collect();
        let mirrored: Vec<Polyline> = curves
            .iter()
            .map(|c| {
                Polyline::new(
                    c.points.iter().map(|p| p.mirror_x()).collect(),
                    c.level,
                    c.closed,
                )
            })
            .collect();
        let d = hausdorff(&curves, &mirrored);
        assert!(d <= spec.cell_diagonal(), "level {level}: {d}");
    }
}

#[test]
fn parallel_flow_portrait_is_horizontal_lines() {
    let params = FlowParams::natural(1.0, 0.0).unwrap();
    let spec = PortraitSpec::new(Bounds::new(-4.0, 4.0, -3.0, 3.0), 80, 60);
    let portrait = contour::portrait(&params, &spec).unwrap();
    assert!(portrait.separatrix_level.is_none());
    assert!(!portrait.curves.is_empty());
    for c in &portrait.curves {
        assert!(!c.closed);
        let (lo, hi) = c
            .points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.y), hi.max(p.y))
            });
        assert!(hi - lo <= 1e-12, "{lo} {hi}");
    }
}

#[test]
fn vortex_portrait_has_cycles_and_separatrix() {
    let params = half();
    let spec = PortraitSpec::new(Bounds::new(-4.0, 4.0, -3.0, 3.0), 160, 120);
    let portrait = contour::portrait(&params, &spec).unwrap();
    let sep = portrait.separatrix_level.unwrap();
    assert!(portrait.levels.contains(&sep));
    assert!(portrait.curves.iter().any(|c| portrait.is_separatrix(c)));
    assert!(portrait
        .curves
        .iter()
        .any(|c| c.closed && c.winding_number(Vec2::ZERO) != 0));
}

#[test]
fn portrait_does_not_depend_on_thread_count() {
    let params = half();
    let spec = PortraitSpec::new(Bounds::new(-4.0, 4.0, -3.0, 3.0), 120, 90);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| contour::portrait(&params, &spec).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(2));
    assert_eq!(one, run(8));
}

#[test]
fn explicit_levels_are_sorted_and_deduplicated() {
    let params = half();
    let spec = PortraitSpec::new(Bounds::new(-4.0, 4.0, -3.0, 3.0), 40, 30)
        .with_levels(LevelSelection::Explicit(vec![0.5, -1.0, 0.5]))
        .with_separatrix(false);
    let portrait = contour::portrait(&params, &spec).unwrap();
    assert_eq!(portrait.levels, vec![-1.0, 0.5]);
}

#[test]
fn trapezoid_rule_converges_spectrally() {
    let params = half();
    let g256 = circulation(&params, Vec2::ZERO, 1.0, 256).unwrap().value;
    let g512 = circulation(&params, Vec2::ZERO, 1.0, 512).unwrap().value;
    assert!((g256 - g512).abs() <= 1e-12);
}

#[test]
fn circulation_is_contour_independent() {
    let params = half();
    let values: Vec<f64> = [0.3, 1.0, 3.0, 7.0]
        .iter()
        .map(|&r| circulation(&params, Vec2::ZERO, r, 512).unwrap().value)
        .collect();
    for a in &values {
        for b in &values {
            assert!((a - b).abs() <= 1e-10);
        }
    }
    // an off-centre circle that still encloses the vortex
    let shifted = circulation(&params, Vec2::new(0.4, -0.3), 1.0, 512)
        .unwrap()
        .value;
    assert!((shifted - values[0]).abs() <= 1e-10);
}
