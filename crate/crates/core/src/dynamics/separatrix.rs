//! Separatrices of the stagnation point: the homoclinic loop around the
//! vortex and the two unbounded branches.

use serde::{Deserialize, Serialize};

use crate::critical::{self, CriticalPoint};
use crate::error::{FlowError, Result};
use crate::field::FlowParams;
use crate::geometry::{Polyline, Vec2};

use super::integrator::{Control, Integrator, StepObserver};
use super::{
    check_start, hermite, Direction, IntegratorConfig, Sample, Trajectory, TrajectoryStatus,
};

/// Seeds sit this far (relative to `delta / k`) from the saddle.
const SEED_OFFSET: f64 = 1e-6;
/// A branch counts as having left the saddle beyond this distance.
const DEPARTURE_RADIUS: f64 = 0.1;
/// Returns are only considered within this distance of the saddle.
const CAPTURE_RADIUS: f64 = 0.05;
/// Closure tolerance for the homoclinic loop.
const LOOP_CLOSURE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatrixResult {
    pub saddle: CriticalPoint,
    pub level: f64,
    /// Closed homoclinic branch, starting and ending at the saddle.
    pub homoclinic_loop: Polyline,
    pub unbounded_branches: Vec<Polyline>,
    /// Enclosed area (positive).
    pub loop_area: f64,
    pub loop_max_radius: f64,
    /// y-coordinate where the loop crosses the negative y-axis.
    pub lower_axis_crossing: f64,
    /// Distance between the loop's return and the saddle.
    pub closure_distance: f64,
    pub seed_offset: f64,
    /// Winding number of the loop around the origin (-1: clockwise).
    pub winding_number: i32,
    /// Largest `|H - level|` over the loop vertices.
    pub max_level_deviation: f64,
}

/// Stops a branch at its closest approach to the saddle after it has
/// travelled away from it.
struct SaddleReturn {
    saddle: Vec2,
    departure: f64,
    capture: f64,
    departed: bool,
    last_distance: f64,
}

impl StepObserver for SaddleReturn {
    fn observe(&mut self, _: &Integrator<'_>, _: &Sample, next: &mut Sample) -> Control {
        let d = next.p.distance(self.saddle);
        if d > self.departure {
            self.departed = true;
        }
        let stop = self.departed && d < self.capture && d > self.last_distance;
        self.last_distance = d;
        if stop {
            Control::Stop(TrajectoryStatus::ClosedOrbitDetected)
        } else {
            Control::Continue
        }
    }
}

struct Branch {
    trajectory: Trajectory,
    /// Index of the closest return to the saddle, if the branch came back.
    return_index: Option<usize>,
    return_distance: f64,
}

fn run_branch(
    params: &FlowParams,
    cfg: &IntegratorConfig,
    saddle: Vec2,
    seed: Vec2,
    direction: Direction,
) -> Result<Branch> {
    check_start(seed, cfg)?;
    let scale = params.length_scale();
    let mut observer = SaddleReturn {
        saddle,
        departure: DEPARTURE_RADIUS * scale,
        capture: CAPTURE_RADIUS * scale,
        departed: false,
        last_distance: f64::INFINITY,
    };
    let cfg = IntegratorConfig {
        stop_on_closure: false,
        ..*cfg
    };
    let trajectory = Integrator::new(params, &cfg, direction).run(seed, &mut observer)?;

    let mut return_index = None;
    let mut return_distance = f64::INFINITY;
    if trajectory.status == TrajectoryStatus::ClosedOrbitDetected {
        let mut departed = false;
        for (i, s) in trajectory.samples.iter().enumerate() {
            let d = s.p.distance(saddle);
            if d > observer.departure {
                departed = true;
            }
            if departed && d < return_distance {
                return_distance = d;
                return_index = Some(i);
            }
        }
    }
    Ok(Branch {
        trajectory,
        return_index,
        return_distance,
    })
}

/// Trace the four separatrix branches of the stagnation point and extract
/// the homoclinic loop.
pub fn trace_separatrix(params: &FlowParams, cfg: &IntegratorConfig) -> Result<SeparatrixResult> {
    cfg.validate()?;
    let saddle = critical::stagnation_point(params)
        .ok_or_else(|| FlowError::InvalidParams("separatrices need delta > 0 and k > 0".into()))?;
    let level = critical::separatrix_level(params)?;
    let [unstable, stable] = saddle
        .eigenvectors
        .expect("saddle always carries eigenvectors");
    let s = saddle.location;
    let scale = params.length_scale();
    let eps = SEED_OFFSET * scale;
    let tolerance = LOOP_CLOSURE * scale;

    let seeds = [
        (s + unstable * eps, Direction::Forward),
        (s - unstable * eps, Direction::Forward),
        (s + stable * eps, Direction::Backward),
        (s - stable * eps, Direction::Backward),
    ];

    let mut homoclinic: Option<(Branch, Direction)> = None;
    let mut unbounded = Vec::new();
    let mut closest = f64::INFINITY;
    for (seed, direction) in seeds {
        let branch = run_branch(params, cfg, s, seed, direction)?;
        closest = closest.min(branch.return_distance);
        if branch.return_index.is_some() && branch.return_distance <= tolerance {
            if homoclinic.is_none() {
                homoclinic = Some((branch, direction));
            }
        } else {
            let mut points = vec![s];
            points.extend(branch.trajectory.samples.iter().map(|x| x.p));
            unbounded.push(Polyline::new(points, Some(level), false));
        }
    }

    let Some((branch, direction)) = homoclinic else {
        return Err(FlowError::HomoclinicNotClosed {
            closest_approach: closest,
            tolerance,
        });
    };
    let end = branch.return_index.expect("returning branch has an index");
    let mut samples: Vec<Sample> = branch.trajectory.samples[..=end].to_vec();
    if direction == Direction::Backward {
        // present the loop in forward time
        let t_end = samples.last().map_or(0.0, |x| x.t);
        samples.reverse();
        for smp in &mut samples {
            smp.t = t_end - smp.t;
            smp.v = -smp.v;
        }
    }

    let mut points = Vec::with_capacity(samples.len() + 2);
    if direction == Direction::Forward {
        points.push(s);
    }
    points.extend(samples.iter().map(|x| x.p));
    if direction == Direction::Backward {
        points.push(s);
    }
    let homoclinic_loop = Polyline::new(points, Some(level), true);

    let max_level_deviation = homoclinic_loop
        .points
        .iter()
        .map(|&p| crate::field::hamiltonian(params, p).map(|h| (h - level).abs()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let winding = homoclinic_loop.winding_number(Vec2::ZERO);
    if winding == 0 {
        return Err(FlowError::HomoclinicNotClosed {
            closest_approach: branch.return_distance,
            tolerance,
        });
    }
    let lower_axis_crossing = lower_crossing(&samples).ok_or(FlowError::HomoclinicNotClosed {
        closest_approach: branch.return_distance,
        tolerance,
    })?;

    Ok(SeparatrixResult {
        level,
        loop_area: homoclinic_loop.signed_area().abs(),
        loop_max_radius: homoclinic_loop.max_radius(),
        homoclinic_loop,
        unbounded_branches: unbounded,
        lower_axis_crossing,
        closure_distance: branch.return_distance,
        seed_offset: eps,
        winding_number: winding,
        max_level_deviation,
        saddle,
    })
}

/// y-value where the sampled curve crosses `x = 0` below the origin,
/// located on the cubic Hermite interpolant.
fn lower_crossing(samples: &[Sample]) -> Option<f64> {
    samples.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        if a.p.y >= 0.0 || b.p.y >= 0.0 || (a.p.x > 0.0) == (b.p.x > 0.0) {
            return None;
        }
        let (s0, s1) = (a, b);
        let (mut lo, mut hi) = (s0.t, s1.t);
        let positive_at_lo = s0.p.x > 0.0;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            let x = hermite(s0, s1, mid).x;
            if (x > 0.0) == positive_at_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(hermite(s0, s1, 0.5 * (lo + hi)).y)
    })
}
