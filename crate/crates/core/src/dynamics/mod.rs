//! Trajectories of `p' = J(p)`: adaptive integration, closed-orbit
//! detection and separatrix tracing.

mod integrator;
mod separatrix;

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::field::FlowParams;
use crate::geometry::{Bounds, Vec2};

use integrator::{Control, Integrator, NoObserver, StepObserver};

pub use separatrix::{trace_separatrix, SeparatrixResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryStatus {
    Completed,
    ClosedOrbitDetected,
    EnteredCoreRadius,
    LeftDomain,
    StepFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

/// One accepted integration point. `v` is the velocity in the direction of
/// integration, `t` the elapsed integration time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub p: Vec2,
    pub v: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    /// Hamiltonian at each sample.
    pub h_values: Vec<f64>,
    /// `max |H(t) - H(0)|` over the samples.
    pub max_h_drift: f64,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    pub fn points(&self) -> Vec<Vec2> {
        self.samples.iter().map(|s| s.p).collect()
    }

    pub fn final_time(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn last_point(&self) -> Vec2 {
        self.samples.last().map_or(Vec2::ZERO, |s| s.p)
    }

    /// Cubic Hermite interpolation of the position at elapsed time `t`.
    pub fn interpolate(&self, t: f64) -> Option<Vec2> {
        let first = self.samples.first()?;
        let last = self.samples.last()?;
        if t < first.t || t > last.t {
            return None;
        }
        let idx = self.samples.partition_point(|s| s.t <= t);
        if idx == 0 {
            return Some(first.p);
        }
        if idx >= self.samples.len() {
            return Some(last.p);
        }
        Some(hermite(&self.samples[idx - 1], &self.samples[idx], t))
    }
}

pub(crate) fn hermite(s0: &Sample, s1: &Sample, t: f64) -> Vec2 {
    let h = s1.t - s0.t;
    if h <= 0.0 {
        return s0.p;
    }
    let u = (t - s0.t) / h;
    let u2 = u * u;
    let u3 = u2 * u;
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    s0.p * h00 + s0.v * (h10 * h) + s1.p * h01 + s1.v * (h11 * h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Exclusion radius around the origin.
    pub core_radius: f64,
    pub max_time: f64,
    pub h_drift_budget: f64,
    pub domain: Bounds,
    /// Position tolerance for a return to the start point.
    pub closure_tol: f64,
    /// Velocity direction tolerance (radians) for a return.
    pub closure_angle: f64,
    /// Halt as soon as a closed orbit is detected.
    pub stop_on_closure: bool,
}

impl IntegratorConfig {
    /// Scale-aware defaults for the given flow.
    pub fn for_params(params: &FlowParams) -> Self {
        let length = params.length_scale();
        let speed = params.speed_scale();
        let core_radius = if params.has_vortex() {
            1e-4 * length
        } else {
            1e-6
        };
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.02 * length / speed,
            core_radius,
            max_time: 1000.0 * length / speed,
            h_drift_budget: 1e-8 * (params.a() * length + params.b()).max(f64::MIN_POSITIVE),
            domain: Bounds::centered_square((10.0 * length).max(5.0)),
            closure_tol: 1e-6,
            closure_angle: 1e-3,
            stop_on_closure: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("core_radius", self.core_radius),
            ("max_time", self.max_time),
            ("h_drift_budget", self.h_drift_budget),
            ("closure_tol", self.closure_tol),
            ("closure_angle", self.closure_angle),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(FlowError::InvalidParams(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if self.rel_tol < 1e-14 || self.abs_tol < 1e-14 {
            return Err(FlowError::InvalidParams(
                "rel_tol and abs_tol must be at least 1e-14".into(),
            ));
        }
        if !self.domain.is_valid() {
            return Err(FlowError::InvalidParams(
                "integration domain is empty".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitResult {
    pub closed: bool,
    /// First return time.
    pub period: Option<f64>,
    /// Distance to the start at the best return (infinite if the
    /// trajectory never came back).
    pub return_distance: f64,
}

/// Watches a trajectory for its first return to the start point through
/// the section normal to the initial velocity.
struct ClosureWatch {
    start: Vec2,
    normal: Vec2,
    start_velocity: Vec2,
    arc_length: f64,
    arm_length: f64,
    tol: f64,
    angle_tol: f64,
    stop: bool,
    best_distance: f64,
    period: Option<f64>,
}

impl ClosureWatch {
    fn new(first: &Sample, cfg: &IntegratorConfig) -> Self {
        ClosureWatch {
            start: first.p,
            normal: first.v.normalized().unwrap_or(Vec2::ZERO),
            start_velocity: first.v,
            arc_length: 0.0,
            arm_length: 10.0 * cfg.closure_tol,
            tol: cfg.closure_tol,
            angle_tol: cfg.closure_angle,
            stop: cfg.stop_on_closure,
            best_distance: f64::INFINITY,
            period: None,
        }
    }

    fn section(&self, p: Vec2) -> f64 {
        (p - self.start).dot(self.normal)
    }

    /// Step length in `(0, h]` at which the section is crossed, by
    /// bisection on re-stepped fifth-order solutions.
    fn locate(&self, integ: &Integrator<'_>, prev: &Sample, h: f64) -> Option<(f64, Vec2)> {
        let (mut lo, mut hi) = (0.0, h);
        let mut best = None;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let p = integ.advance(prev, mid).ok()?;
            if self.section(p) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
                best = Some((mid, p));
            }
            if hi - lo <= 1e-15 * h.max(prev.t) {
                break;
            }
        }
        best.or_else(|| integ.advance(prev, h).ok().map(|p| (h, p)))
    }
}

impl StepObserver for ClosureWatch {
    fn observe(&mut self, integ: &Integrator<'_>, prev: &Sample, next: &mut Sample) -> Control {
        let armed = self.arc_length > self.arm_length;
        self.arc_length += next.p.distance(prev.p);
        if !armed || self.normal == Vec2::ZERO || self.period.is_some() {
            return Control::Continue;
        }
        if !(self.section(prev.p) < 0.0 && self.section(next.p) >= 0.0) {
            return Control::Continue;
        }
        let h = next.t - prev.t;
        let Some((tau, q)) = self.locate(integ, prev, h) else {
            return Control::Continue;
        };
        let distance = q.distance(self.start);
        self.best_distance = self.best_distance.min(distance);
        let Ok(vq) = integ.velocity(q) else {
            return Control::Continue;
        };
        if distance <= self.tol && vq.angle_to(self.start_velocity) <= self.angle_tol {
            self.period = Some(prev.t + tau);
            if self.stop {
                *next = Sample {
                    t: prev.t + tau,
                    p: q,
                    v: vq,
                };
                return Control::Stop(TrajectoryStatus::ClosedOrbitDetected);
            }
        }
        Control::Continue
    }
}

fn check_start(p0: Vec2, cfg: &IntegratorConfig) -> Result<()> {
    if !p0.is_finite() {
        return Err(FlowError::InvalidParams(format!(
            "start point ({}, {}) is not finite",
            p0.x, p0.y
        )));
    }
    if p0.norm() < cfg.core_radius {
        return Err(FlowError::InvalidStart {
            x: p0.x,
            y: p0.y,
            core_radius: cfg.core_radius,
        });
    }
    Ok(())
}

/// Integrate forward in time from `p0`.
pub fn integrate(params: &FlowParams, p0: Vec2, cfg: &IntegratorConfig) -> Result<Trajectory> {
    integrate_directed(params, p0, cfg, Direction::Forward)
}

/// Integrate in the given time direction. Backward trajectories still report
/// increasing elapsed time.
pub fn integrate_directed(
    params: &FlowParams,
    p0: Vec2,
    cfg: &IntegratorConfig,
    direction: Direction,
) -> Result<Trajectory> {
    let (traj, _) = run_with_closure(params, p0, cfg, direction)?;
    Ok(traj)
}

fn run_with_closure(
    params: &FlowParams,
    p0: Vec2,
    cfg: &IntegratorConfig,
    direction: Direction,
) -> Result<(Trajectory, Option<ClosureWatch>)> {
    cfg.validate()?;
    check_start(p0, cfg)?;
    let integ = Integrator::new(params, cfg, direction);
    let first = Sample {
        t: 0.0,
        p: p0,
        v: integ.velocity(p0)?,
    };
    if first.v == Vec2::ZERO {
        // equilibrium or vanishing field: nothing to detect
        let traj = integ.run(p0, &mut NoObserver)?;
        return Ok((traj, None));
    }
    let mut watch = ClosureWatch::new(&first, cfg);
    let traj = integ.run(p0, &mut watch)?;
    Ok((traj, Some(watch)))
}

/// Integrate until the trajectory returns to `p0` (position within
/// `closure_tol`, velocity direction within `closure_angle`) or until
/// `max_time`, domain exit or core entry.
pub fn detect_closed_orbit(
    params: &FlowParams,
    p0: Vec2,
    cfg: &IntegratorConfig,
) -> Result<OrbitResult> {
    let cfg = IntegratorConfig {
        stop_on_closure: true,
        ..*cfg
    };
    let (_, watch) = run_with_closure(params, p0, &cfg, Direction::Forward)?;
    Ok(match watch {
        Some(w) => OrbitResult {
            closed: w.period.is_some(),
            period: w.period,
            return_distance: w.best_distance,
        },
        None => OrbitResult {
            closed: false,
            period: None,
            return_distance: f64::INFINITY,
        },
    })
}
