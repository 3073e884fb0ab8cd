//! Dormand–Prince 5(4) stepper with error control and a hard budget on the
//! Hamiltonian drift.

use crate::error::Result;
use crate::field::{self, FlowParams};
use crate::geometry::Vec2;

use super::{Direction, IntegratorConfig, Sample, Trajectory, TrajectoryStatus};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Fifth-order weights (identical to the last stage row: FSAL).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

/// Embedded fourth-order weights.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_SHRINK: f64 = 0.2;
const MAX_GROW: f64 = 5.0;

/// Decision returned by an observer after each accepted step.
pub(crate) enum Control {
    Continue,
    Stop(TrajectoryStatus),
}

pub(crate) trait StepObserver {
    /// Called after every accepted step. May overwrite `next` (for example
    /// with a located event) before asking to stop.
    fn observe(&mut self, integ: &Integrator<'_>, prev: &Sample, next: &mut Sample) -> Control;
}

/// Observer that never stops the integration.
pub(crate) struct NoObserver;

impl StepObserver for NoObserver {
    fn observe(&mut self, _: &Integrator<'_>, _: &Sample, _: &mut Sample) -> Control {
        Control::Continue
    }
}

struct StepOutcome {
    p: Vec2,
    v: Vec2,
    err_norm: f64,
}

pub(crate) struct Integrator<'a> {
    params: &'a FlowParams,
    cfg: &'a IntegratorConfig,
    sign: f64,
}

impl<'a> Integrator<'a> {
    pub(crate) fn new(
        params: &'a FlowParams,
        cfg: &'a IntegratorConfig,
        direction: Direction,
    ) -> Self {
        let sign = match direction {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        };
        Integrator { params, cfg, sign }
    }

    pub(crate) fn velocity(&self, p: Vec2) -> Result<Vec2> {
        Ok(field::current(self.params, p)? * self.sign)
    }

    /// Fifth-order solution after a step of length `h` from `from`, with no
    /// error control. Used to locate events inside an accepted step.
    pub(crate) fn advance(&self, from: &Sample, h: f64) -> Result<Vec2> {
        Ok(self.stages(from.p, from.v, h)?.p)
    }

    fn stages(&self, p: Vec2, v: Vec2, h: f64) -> Result<StepOutcome> {
        let mut k = [Vec2::ZERO; 7];
        k[0] = v;
        for s in 1..7 {
            let mut y = p;
            for (j, kj) in k.iter().enumerate().take(s) {
                y = y + *kj * (h * A[s][j]);
            }
            k[s] = self.velocity(y)?;
        }
        const { assert!(C[6] == 1.0) };
        let mut p5 = p;
        let mut err = Vec2::ZERO;
        for s in 0..7 {
            p5 = p5 + k[s] * (h * B5[s]);
            err = err + k[s] * (h * (B5[s] - B4[s]));
        }
        let scale = |a: f64, b: f64| self.cfg.abs_tol + self.cfg.rel_tol * a.abs().max(b.abs());
        let err_norm = (err.x.abs() / scale(p.x, p5.x)).max(err.y.abs() / scale(p.y, p5.y));
        Ok(StepOutcome {
            p: p5,
            v: k[6],
            err_norm,
        })
    }

    fn hamiltonian(&self, p: Vec2) -> Result<f64> {
        field::hamiltonian(self.params, p)
    }

    pub(crate) fn run<O: StepObserver>(&self, p0: Vec2, observer: &mut O) -> Result<Trajectory> {
        let cfg = self.cfg;
        let h0_value = self.hamiltonian(p0)?;
        let first = Sample {
            t: 0.0,
            p: p0,
            v: self.velocity(p0)?,
        };
        let mut traj = Trajectory {
            samples: vec![first],
            h_values: vec![h0_value],
            max_h_drift: 0.0,
            status: TrajectoryStatus::Completed,
        };
        if !cfg.domain.contains(p0) {
            traj.status = TrajectoryStatus::LeftDomain;
            return Ok(traj);
        }

        let time_scale = self.params.length_scale() / self.params.speed_scale();
        let h_floor = 1e-13 * time_scale;
        let mut h = cfg.max_step.min(0.01 * time_scale);

        loop {
            let prev = *traj.samples.last().expect("trajectory is never empty");
            let remaining = cfg.max_time - prev.t;
            if remaining <= 0.0 {
                traj.status = TrajectoryStatus::Completed;
                return Ok(traj);
            }
            let last_step = h >= remaining;
            let step = if last_step { remaining } else { h };

            let outcome = self
                .stages(prev.p, prev.v, step)
                .ok()
                .filter(|o| o.err_norm.is_finite() && o.p.is_finite() && o.v.is_finite());
            let Some(outcome) = outcome else {
                h = step * MIN_SHRINK;
                if h < h_floor {
                    traj.status = TrajectoryStatus::StepFailure;
                    return Ok(traj);
                }
                continue;
            };

            if outcome.err_norm > 1.0 {
                let factor = (SAFETY * outcome.err_norm.powf(-0.2)).max(MIN_SHRINK);
                h = step * factor;
                if h < h_floor {
                    traj.status = TrajectoryStatus::StepFailure;
                    return Ok(traj);
                }
                continue;
            }

            let h_new = match self.hamiltonian(outcome.p) {
                Ok(v) if (v - h0_value).abs() <= cfg.h_drift_budget => v,
                _ => {
                    // over budget: bisect
                    h = 0.5 * step;
                    if h < h_floor {
                        traj.status = TrajectoryStatus::StepFailure;
                        return Ok(traj);
                    }
                    continue;
                }
            };

            let t_next = if last_step {
                cfg.max_time
            } else {
                prev.t + step
            };
            let mut next = Sample {
                t: t_next,
                p: outcome.p,
                v: outcome.v,
            };

            if next.p.norm() < cfg.core_radius {
                traj.status = TrajectoryStatus::EnteredCoreRadius;
                return Ok(traj);
            }

            let control = observer.observe(self, &prev, &mut next);
            let h_value = if next.p == outcome.p {
                h_new
            } else {
                self.hamiltonian(next.p)?
            };
            traj.max_h_drift = traj.max_h_drift.max((h_value - h0_value).abs());
            traj.samples.push(next);
            traj.h_values.push(h_value);

            if let Control::Stop(status) = control {
                traj.status = status;
                return Ok(traj);
            }
            if !cfg.domain.contains(next.p) {
                traj.status = TrajectoryStatus::LeftDomain;
                return Ok(traj);
            }
            if last_step {
                traj.status = TrajectoryStatus::Completed;
                return Ok(traj);
            }

            let grow = if outcome.err_norm == 0.0 {
                MAX_GROW
            } else {
                (SAFETY * outcome.err_norm.powf(-0.2)).clamp(MIN_SHRINK, MAX_GROW)
            };
            h = (step * grow).min(cfg.max_step);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_rows_are_consistent() {
        for (s, row) in A.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            assert!((sum - C[s]).abs() < 1e-14, "row {s}");
        }
        assert!((B5.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((B4.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fifth_order_on_linear_rotation() {
        // Pure rotation x' = b y / r^2 is exactly circular; a single step of
        // size h must have an error scaling like h^6.
        let params = FlowParams::new(1.0, 1.0, 0.0, 0.5).unwrap();
        let cfg = IntegratorConfig::for_params(&params);
        let integ = Integrator::new(&params, &cfg, Direction::Forward);
        let p0 = Vec2::new(1.0, 0.0);
        let s0 = Sample {
            t: 0.0,
            p: p0,
            v: integ.velocity(p0).unwrap(),
        };
        let err = |h: f64| {
            let p = integ.advance(&s0, h).unwrap();
            // angular speed b / r^2 = 0.5, clockwise
            let exact = Vec2::new((0.5 * h).cos(), -(0.5 * h).sin());
            p.distance(exact)
        };
        let order = (err(0.2) / err(0.1)).log2();
        assert!(order > 5.5, "observed local order {order}");
    }
}
