//! Critical points of the current: the saddle-type stagnation point at
//! `z0 = i delta / k` and the vortex singularity at the origin.

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::field::{self, FlowParams};
use crate::geometry::{ComplexValue, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    SaddleStagnation,
    VortexSingularity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: Vec2,
    pub kind: CriticalKind,
    /// `[unstable, stable]` for the saddle.
    pub eigenvalues: Option<[f64; 2]>,
    /// Unit eigenvectors in the same order as `eigenvalues`.
    pub eigenvectors: Option<[Vec2; 2]>,
    /// Hamiltonian at the point; absent for the vortex.
    pub level: Option<f64>,
}

/// Partial derivatives of the current `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jacobian2 {
    pub du_dx: f64,
    pub du_dy: f64,
    pub dv_dx: f64,
    pub dv_dy: f64,
}

impl Jacobian2 {
    pub fn trace(&self) -> f64 {
        self.du_dx + self.dv_dy
    }

    pub fn determinant(&self) -> f64 {
        self.du_dx * self.dv_dy - self.du_dy * self.dv_dx
    }

    pub fn apply(&self, w: Vec2) -> Vec2 {
        Vec2::new(
            self.du_dx * w.x + self.du_dy * w.y,
            self.dv_dx * w.x + self.dv_dy * w.y,
        )
    }

    /// Real eigenvalues in descending order, or `None` for a complex pair.
    pub fn real_eigenvalues(&self) -> Option<[f64; 2]> {
        let half_tr = 0.5 * self.trace();
        let disc = half_tr * half_tr - self.determinant();
        if disc < 0.0 {
            return None;
        }
        let root = disc.sqrt();
        Some([half_tr + root, half_tr - root])
    }

    /// Unit eigenvector for a real eigenvalue, with positive x-component
    /// (positive y on a tie).
    pub fn eigenvector(&self, lambda: f64) -> Option<Vec2> {
        let from_first_row = Vec2::new(self.du_dy, lambda - self.du_dx);
        let from_second_row = Vec2::new(lambda - self.dv_dy, self.dv_dx);
        let w = if from_first_row.norm_sq() >= from_second_row.norm_sq() {
            from_first_row
        } else {
            from_second_row
        };
        let w = w.normalized()?;
        Some(canonical_sign(w))
    }
}

fn canonical_sign(w: Vec2) -> Vec2 {
    if w.x > 0.0 || (w.x == 0.0 && w.y > 0.0) {
        w
    } else {
        -w
    }
}

/// Closed-form Jacobian of the current.
pub fn jacobian(params: &FlowParams, p: Vec2) -> Result<Jacobian2> {
    if !params.has_vortex() {
        return Ok(Jacobian2 {
            du_dx: 0.0,
            du_dy: 0.0,
            dv_dx: 0.0,
            dv_dy: 0.0,
        });
    }
    if p.x == 0.0 && p.y == 0.0 {
        return Err(FlowError::SingularPoint { x: p.x, y: p.y });
    }
    let b = params.b();
    let r2 = p.norm_sq();
    let r4 = r2 * r2;
    let mixed = 2.0 * b * p.x * p.y / r4;
    let shear = b * (p.x * p.x - p.y * p.y) / r4;
    Ok(Jacobian2 {
        du_dx: -mixed,
        du_dy: shear,
        dv_dx: shear,
        dv_dy: mixed,
    })
}

/// Hyperbolic rate `c = hbar k^2 / (delta M)` of the saddle.
pub fn saddle_rate(params: &FlowParams) -> Option<f64> {
    params
        .stagnation_distance()
        .map(|_| params.a() * params.k() / params.delta())
}

/// The stagnation point `(0, delta / k)`; absent when `delta = 0` or `k = 0`.
pub fn stagnation_point(params: &FlowParams) -> Option<CriticalPoint> {
    let y0 = params.stagnation_distance()?;
    let c = saddle_rate(params)?;
    let location = Vec2::new(0.0, y0);
    // Analytically J(z0) = [[0, -c], [-c, 0]]: unstable along (1, -1),
    // stable along (1, 1).
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Some(CriticalPoint {
        location,
        kind: CriticalKind::SaddleStagnation,
        eigenvalues: Some([c, -c]),
        eigenvectors: Some([Vec2::new(s, -s), Vec2::new(s, s)]),
        level: Some(separatrix_level_unchecked(params, y0)),
    })
}

/// The vortex singularity at the origin, present whenever `delta > 0`.
pub fn vortex(params: &FlowParams) -> Option<CriticalPoint> {
    params.has_vortex().then_some(CriticalPoint {
        location: Vec2::ZERO,
        kind: CriticalKind::VortexSingularity,
        eigenvalues: None,
        eigenvectors: None,
        level: None,
    })
}

/// Classify a regular point with zero current from its numerical Jacobian.
/// Used to cross-check [`stagnation_point`].
pub fn classify_from_jacobian(params: &FlowParams, p: Vec2) -> Result<Option<CriticalPoint>> {
    let jac = jacobian(params, p)?;
    let Some([hi, lo]) = jac.real_eigenvalues() else {
        return Ok(None);
    };
    if !(hi > 0.0 && lo < 0.0) {
        return Ok(None);
    }
    let (Some(eu), Some(es)) = (jac.eigenvector(hi), jac.eigenvector(lo)) else {
        return Ok(None);
    };
    Ok(Some(CriticalPoint {
        location: p,
        kind: CriticalKind::SaddleStagnation,
        eigenvalues: Some([hi, lo]),
        eigenvectors: Some([eu, es]),
        level: Some(field::hamiltonian(params, p)?),
    }))
}

/// Leading term of the potential at the stagnation point,
/// `F3(z) = i c/2 (z - z0)^2`.
pub fn local_quadratic_potential(params: &FlowParams, z: ComplexValue) -> Result<ComplexValue> {
    let (y0, c) = match (params.stagnation_distance(), saddle_rate(params)) {
        (Some(y0), Some(c)) => (y0, c),
        _ => {
            return Err(FlowError::InvalidParams(
                "the local quadratic potential needs delta > 0 and k > 0".into(),
            ))
        }
    };
    let w = z - ComplexValue::new(0.0, y0);
    Ok(ComplexValue::new(0.0, 0.5 * c) * w * w)
}

/// Level of the Hamiltonian through the saddle,
/// `(hbar delta / M) (log(delta / k) - 1)`.
pub fn separatrix_level(params: &FlowParams) -> Result<f64> {
    params
        .stagnation_distance()
        .map(|y0| separatrix_level_unchecked(params, y0))
        .ok_or_else(|| FlowError::InvalidParams("the separatrix needs delta > 0 and k > 0".into()))
}

fn separatrix_level_unchecked(params: &FlowParams, y0: f64) -> f64 {
    params.b() * (y0.ln() - 1.0)
}
