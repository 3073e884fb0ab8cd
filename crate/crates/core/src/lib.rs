//! Quantum probability-current flow around an infinitely thin magnetic
//! string (the Aharonov–Bohm configuration), treated as a planar
//! Hamiltonian system.
//!
//! * [`field`]: the current, the complex potential family, stream function,
//!   velocity potential and Hamiltonian, flux conversions.
//! * [`critical`]: stagnation point, vortex, Jacobian, local quadratic model
//!   and separatrix level.
//! * [`dynamics`]: adaptive integration, closed orbits, homoclinic loop.
//! * [`contour`]: streamline extraction, phase portraits, circulation.
//! * [`verify`]: numerical checks of every analytic identity of the model.

pub mod contour;
pub mod critical;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod geometry;
pub mod verify;

pub use error::{FlowError, Result};
pub use field::{FlowParams, PhysicalConstants};
pub use geometry::{Bounds, ComplexValue, Polyline, Vec2};
