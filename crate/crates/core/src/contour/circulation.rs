use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::field::{self, FlowParams, PhysicalConstants};
use crate::geometry::Vec2;

pub const MIN_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirculationResult {
    pub value: f64,
    pub center: Vec2,
    pub radius: f64,
    pub samples: usize,
    /// `|value(samples) - value(samples / 2)|`.
    pub richardson_error_estimate: f64,
}

/// Circulation `\oint J . t ds` over the counter-clockwise circle, by the
/// periodic trapezoidal rule.
pub fn circulation(
    params: &FlowParams,
    center: Vec2,
    radius: f64,
    samples: usize,
) -> Result<CirculationResult> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(FlowError::InvalidContour(format!(
            "radius must be positive, got {radius}"
        )));
    }
    if !center.is_finite() {
        return Err(FlowError::InvalidContour("center must be finite".into()));
    }
    if samples < MIN_SAMPLES {
        return Err(FlowError::InvalidContour(format!(
            "at least {MIN_SAMPLES} samples are required, got {samples}"
        )));
    }
    let core = 1e-4 * params.length_scale();
    if params.has_vortex() && (center.norm() - radius).abs() <= core {
        return Err(FlowError::InvalidContour(format!(
            "circle of radius {radius} about ({}, {}) passes through the vortex",
            center.x, center.y
        )));
    }

    let fine = trapezoid(params, center, radius, samples)?;
    let coarse = trapezoid(params, center, radius, samples / 2)?;
    Ok(CirculationResult {
        value: fine,
        center,
        radius,
        samples,
        richardson_error_estimate: (fine - coarse).abs(),
    })
}

fn trapezoid(params: &FlowParams, center: Vec2, radius: f64, n: usize) -> Result<f64> {
    let step = 2.0 * PI / n as f64;
    let mut sum = 0.0;
    for j in 0..n {
        let (s, c) = (step * j as f64).sin_cos();
        let p = center + Vec2::new(c, s) * radius;
        // t ds = radius (-sin, cos) dtheta
        let tangent = Vec2::new(-s, c) * radius;
        sum += field::current(params, p)?.dot(tangent);
    }
    Ok(sum * step)
}

/// Circulation expressed through the enclosed flux, `-e Phi / (c M)`.
pub fn circulation_from_flux(consts: &PhysicalConstants, mass: f64, flux: f64) -> Result<f64> {
    if !(mass.is_finite() && mass > 0.0) {
        return Err(FlowError::InvalidParams(format!(
            "mass must be positive, got {mass}"
        )));
    }
    Ok(-consts.charge() * flux / (consts.light_speed() * mass))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vortex_circulation() {
        let params = FlowParams::natural(1.0, 0.5).unwrap();
        let r = circulation(&params, Vec2::ZERO, 1.0, 512).unwrap();
        assert!((r.value + PI).abs() < 1e-12);
        assert!(r.richardson_error_estimate >= 0.0 && r.richardson_error_estimate < 1e-12);
    }

    #[test]
    fn circle_away_from_origin() {
        let params = FlowParams::natural(1.0, 0.5).unwrap();
        let r = circulation(&params, Vec2::new(5.0, 0.0), 1.0, 512).unwrap();
        assert!(r.value.abs() <= 1e-10);
        let parallel = FlowParams::natural(1.0, 0.0).unwrap();
        let r = circulation(&parallel, Vec2::new(0.3, -0.2), 2.0, 64).unwrap();
        assert!(r.value.abs() <= 1e-13);
    }

    #[test]
    fn invalid_contours() {
        let params = FlowParams::natural(1.0, 0.5).unwrap();
        assert!(circulation(&params, Vec2::new(1.0, 0.0), 1.0, 64).is_err());
        assert!(circulation(&params, Vec2::ZERO, 0.0, 64).is_err());
        assert!(circulation(&params, Vec2::ZERO, 1.0, 8).is_err());
        // without flux the origin is a regular point
        let parallel = FlowParams::natural(1.0, 0.0).unwrap();
        assert!(circulation(&parallel, Vec2::new(1.0, 0.0), 1.0, 64).is_ok());
    }

    #[test]
    fn flux_form() {
        let unit = PhysicalConstants::unit();
        assert!((circulation_from_flux(&unit, 1.0, PI).unwrap() + PI).abs() < 1e-15);
        assert_eq!(circulation_from_flux(&unit, 1.0, 0.0).unwrap(), 0.0);
        let g1 = circulation_from_flux(&unit, 2.0, 0.7).unwrap();
        let g2 = circulation_from_flux(&unit, 2.0, 1.4).unwrap();
        assert_eq!(g2, 2.0 * g1);
        assert!(circulation_from_flux(&unit, 0.0, 1.0).is_err());
    }
}
