//! Closed-form evaluation of the probability current around a magnetic
//! string, its complex potential family and the derived scalar fields.
//!
//! Every formula is written through the two coefficients
//!
//! * `a = hbar * k / mass` (uniform drift speed), and
//! * `b = hbar * delta / mass` (vortex strength),
//!
//! so that `k = 0` (pure rotation) is an ordinary parameter value instead of
//! a division by zero. With `z = x + iy`:
//!
//! ```text
//! J   = (-a + b y / r^2, -b x / r^2)
//! F   = -a z + i b log z          (principal branch)
//! F'  = -a + i b / z  = u - i v
//! psi = Im F = -a y + b log r     (also the Hamiltonian H)
//! phi = Re F = -a x - b theta
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::geometry::{ComplexValue, Vec2};

/// Largest flux parameter accepted unless the relaxed mode is requested.
pub const DELTA_UPPER_BOUND: f64 = 0.5;

/// Points with `x < 0` and `|y| <= BRANCH_CUT_GUARD * |x|` are flagged as
/// lying on the logarithm's branch cut.
pub const BRANCH_CUT_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    hbar: f64,
    mass: f64,
    k: f64,
    delta: f64,
    relaxed: bool,
}

impl FlowParams {
    /// Parameters with the flux parameter restricted to `0 <= delta <= 1/2`.
    pub fn new(hbar: f64, mass: f64, k: f64, delta: f64) -> Result<Self> {
        Self::build(hbar, mass, k, delta, false)
    }

    /// Parameters accepting any `delta >= 0`.
    pub fn relaxed(hbar: f64, mass: f64, k: f64, delta: f64) -> Result<Self> {
        Self::build(hbar, mass, k, delta, true)
    }

    /// `hbar = mass = 1`.
    pub fn natural(k: f64, delta: f64) -> Result<Self> {
        Self::new(1.0, 1.0, k, delta)
    }

    fn build(hbar: f64, mass: f64, k: f64, delta: f64, relaxed: bool) -> Result<Self> {
        let bad = |msg: String| Err(FlowError::InvalidParams(msg));
        if !(hbar.is_finite() && hbar > 0.0) {
            return bad(format!("hbar must be positive and finite, got {hbar}"));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return bad(format!("mass must be positive and finite, got {mass}"));
        }
        if !(k.is_finite() && k >= 0.0) {
            return bad(format!("k must be nonnegative and finite, got {k}"));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return bad(format!("delta must be nonnegative and finite, got {delta}"));
        }
        if !relaxed && delta > DELTA_UPPER_BOUND {
            return bad(format!(
                "delta = {delta} exceeds {DELTA_UPPER_BOUND}; use the relaxed mode to lift the bound"
            ));
        }
        let params = FlowParams {
            hbar,
            mass,
            k,
            delta,
            relaxed,
        };
        if !(params.a().is_finite() && params.b().is_finite()) {
            return bad("derived coefficients overflow".to_string());
        }
        Ok(params)
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_relaxed(&self) -> bool {
        self.relaxed
    }

    /// Uniform drift speed `hbar k / M`.
    pub fn a(&self) -> f64 {
        self.hbar * self.k / self.mass
    }

    /// Vortex strength `hbar delta / M`.
    pub fn b(&self) -> f64 {
        self.hbar * self.delta / self.mass
    }

    /// Whether the field has a singular vortex at the origin.
    pub fn has_vortex(&self) -> bool {
        self.delta > 0.0
    }

    /// Distance `delta / k` from the origin to the stagnation point, when it exists.
    pub fn stagnation_distance(&self) -> Option<f64> {
        (self.k > 0.0 && self.delta > 0.0).then(|| self.delta / self.k)
    }

    /// Natural length scale of the flow: `delta / k` when both are positive,
    /// otherwise 1.
    pub fn length_scale(&self) -> f64 {
        self.stagnation_distance().unwrap_or(1.0)
    }

    /// Typical speed at the natural length scale, never zero.
    pub fn speed_scale(&self) -> f64 {
        let s = self.a() + self.b() / self.length_scale();
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    fn check_regular(&self, p: Vec2) -> Result<()> {
        if self.has_vortex() && p.x == 0.0 && p.y == 0.0 {
            Err(FlowError::SingularPoint { x: p.x, y: p.y })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    charge: f64,
    light_speed: f64,
}

impl PhysicalConstants {
    pub fn new(charge: f64, light_speed: f64) -> Result<Self> {
        if !(charge.is_finite() && charge > 0.0) {
            return Err(FlowError::InvalidParams(format!(
                "charge must be positive, got {charge}"
            )));
        }
        if !(light_speed.is_finite() && light_speed > 0.0) {
            return Err(FlowError::InvalidParams(format!(
                "light speed must be positive, got {light_speed}"
            )));
        }
        Ok(PhysicalConstants {
            charge,
            light_speed,
        })
    }

    /// `e = c = 1`.
    pub fn unit() -> Self {
        PhysicalConstants {
            charge: 1.0,
            light_speed: 1.0,
        }
    }

    pub fn charge(&self) -> f64 {
        self.charge
    }

    pub fn light_speed(&self) -> f64 {
        self.light_speed
    }
}

/// A value computed on the principal branch of the logarithm, tagged with
/// whether the input sat on the branch cut (negative real axis).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchTagged<T> {
    pub value: T,
    pub on_branch_cut: bool,
}

pub fn on_branch_cut(z: ComplexValue) -> bool {
    z.re < 0.0 && z.im.abs() <= BRANCH_CUT_GUARD * z.re.abs()
}

/// Anything that can produce a planar current. The analytic field
/// implements it; the verification suite accepts any implementation.
pub trait CurrentField: Sync {
    fn current_at(&self, p: Vec2) -> Result<Vec2>;
}

impl CurrentField for FlowParams {
    fn current_at(&self, p: Vec2) -> Result<Vec2> {
        current(self, p)
    }
}

/// Probability current `J(x, y)`.
pub fn current(params: &FlowParams, p: Vec2) -> Result<Vec2> {
    params.check_regular(p)?;
    let a = params.a();
    if !params.has_vortex() {
        return Ok(Vec2::new(-a, 0.0));
    }
    let b = params.b();
    let r2 = p.norm_sq();
    Ok(Vec2::new(-a + b * p.y / r2, -b * p.x / r2))
}

/// Complex potential `F(z) = -a z + i b log z` on the principal branch.
pub fn complex_potential(
    params: &FlowParams,
    z: ComplexValue,
) -> Result<BranchTagged<ComplexValue>> {
    params.check_regular(Vec2::from_complex(z))?;
    let value = if params.has_vortex() {
        -params.a() * z + ComplexValue::new(0.0, params.b()) * z.ln()
    } else {
        -params.a() * z
    };
    Ok(BranchTagged {
        value,
        on_branch_cut: params.has_vortex() && on_branch_cut(z),
    })
}

/// `F'(z) = -a + i b / z`, equal to `u - i v`.
pub fn complex_derivative(params: &FlowParams, z: ComplexValue) -> Result<ComplexValue> {
    params.check_regular(Vec2::from_complex(z))?;
    let a = params.a();
    if !params.has_vortex() {
        return Ok(ComplexValue::new(-a, 0.0));
    }
    let i_b = ComplexValue::new(0.0, params.b());
    Ok(ComplexValue::new(-a, 0.0) + i_b / z)
}

/// Shared kernel behind [`stream_function`] and [`hamiltonian`].
fn stream_kernel(params: &FlowParams, p: Vec2) -> Result<f64> {
    params.check_regular(p)?;
    let uniform = -params.a() * p.y;
    if !params.has_vortex() {
        return Ok(uniform);
    }
    let r2 = p.norm_sq();
    Ok(uniform + params.b() * 0.5 * r2.ln())
}

/// Stream function `psi = -a y + b log r`; even in `x`.
pub fn stream_function(params: &FlowParams, p: Vec2) -> Result<f64> {
    stream_kernel(params, p)
}

/// Hamiltonian of the planar system `x' = dH/dy, y' = -dH/dx`. Identical to
/// the stream function.
pub fn hamiltonian(params: &FlowParams, p: Vec2) -> Result<f64> {
    stream_kernel(params, p)
}

/// Velocity potential `phi = Re F = -a x - b theta`, discontinuous across the
/// negative real axis.
pub fn velocity_potential(params: &FlowParams, p: Vec2) -> Result<BranchTagged<f64>> {
    params.check_regular(p)?;
    let z = p.to_complex();
    let value = if params.has_vortex() {
        -params.a() * p.x - params.b() * z.arg()
    } else {
        -params.a() * p.x
    };
    Ok(BranchTagged {
        value,
        on_branch_cut: params.has_vortex() && on_branch_cut(z),
    })
}

/// Classical and quantum parts `(F1, F2)` of the complex potential:
/// `F1 = -a z`, `F2 = i b log z`.
pub fn decompose_potential(
    params: &FlowParams,
    z: ComplexValue,
) -> Result<(ComplexValue, ComplexValue)> {
    params.check_regular(Vec2::from_complex(z))?;
    let classical = z * (-params.a());
    let quantum = if params.has_vortex() {
        ComplexValue::new(0.0, params.b()) * z.ln()
    } else {
        ComplexValue::new(0.0, 0.0)
    };
    Ok((classical, quantum))
}

/// Flux parameter `delta = e Phi / (2 pi hbar c)`.
pub fn flux_to_delta(consts: &PhysicalConstants, hbar: f64, flux: f64) -> Result<f64> {
    check_hbar(hbar)?;
    Ok(consts.charge * flux / (2.0 * PI * hbar * consts.light_speed))
}

/// Inverse of [`flux_to_delta`]: `Phi = 2 pi hbar c delta / e`.
pub fn delta_to_flux(consts: &PhysicalConstants, hbar: f64, delta: f64) -> Result<f64> {
    check_hbar(hbar)?;
    Ok(2.0 * PI * hbar * consts.light_speed * delta / consts.charge)
}

fn check_hbar(hbar: f64) -> Result<()> {
    if hbar.is_finite() && hbar > 0.0 {
        Ok(())
    } else {
        Err(FlowError::InvalidParams(format!(
            "hbar must be positive, got {hbar}"
        )))
    }
}

/// Vector potential of a thin flux tube, `A = Phi / (2 pi r) e_theta`.
pub fn vector_potential(_consts: &PhysicalConstants, flux: f64, p: Vec2) -> Result<Vec2> {
    if flux == 0.0 {
        return Ok(Vec2::ZERO);
    }
    let r2 = p.norm_sq();
    if r2 == 0.0 {
        return Err(FlowError::SingularPoint { x: p.x, y: p.y });
    }
    // Phi/(2 pi r) * (-y/r, x/r)
    let s = flux / (2.0 * PI * r2);
    Ok(Vec2::new(-p.y * s, p.x * s))
}
