//! Planar primitives shared by every module: points, boxes and polylines.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Complex numbers (`z = x + iy`, potentials and their derivatives).
pub type ComplexValue = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the planar cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Reflection in the y-axis.
    pub fn mirror_x(self) -> Vec2 {
        Vec2::new(-self.x, self.y)
    }

    pub fn to_complex(self) -> ComplexValue {
        Complex64::new(self.x, self.y)
    }

    pub fn from_complex(z: ComplexValue) -> Self {
        Vec2::new(z.re, z.im)
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        (n > 0.0).then(|| self * (1.0 / n))
    }

    /// Unsigned angle between two nonzero vectors, in radians.
    pub fn angle_to(self, other: Vec2) -> f64 {
        self.cross(other).atan2(self.dot(other)).abs()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl From<(f64, f64)> for Vec2 {
    fn from((x, y): (f64, f64)) -> Self {
        Vec2::new(x, y)
    }
}

/// Axis-aligned rectangle `[xmin, xmax] x [ymin, ymax]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Bounds {
    pub const fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Self {
        Bounds {
            xmin,
            xmax,
            ymin,
            ymax,
        }
    }

    /// Square `[-half, half]^2`.
    pub fn centered_square(half: f64) -> Self {
        Bounds::new(-half, half, -half, half)
    }

    pub fn is_valid(&self) -> bool {
        [self.xmin, self.xmax, self.ymin, self.ymax]
            .iter()
            .all(|v| v.is_finite())
            && self.xmax > self.xmin
            && self.ymax > self.ymin
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }
}

/// Ordered vertex list carrying a streamline, separatrix branch or orbit.
///
/// Closed polylines repeat their first vertex at the end (up to the closure
/// tolerance of whoever built them).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<Vec2>,
    pub level: Option<f64>,
    pub closed: bool,
}

impl Polyline {
    pub fn new(points: Vec<Vec2>, level: Option<f64>, closed: bool) -> Self {
        Polyline {
            points,
            level,
            closed,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn segments(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    /// Signed shoelace area; negative for clockwise loops. The polygon is
    /// closed implicitly.
    pub fn signed_area(&self) -> f64 {
        signed_area(&self.points)
    }

    pub fn winding_number(&self, q: Vec2) -> i32 {
        winding_number(&self.points, q)
    }

    pub fn max_radius(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// Arc length along the vertices.
    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| a.distance(b)).sum()
    }

    /// Distance from `q` to the nearest point of the polyline.
    pub fn distance_to(&self, q: Vec2) -> f64 {
        match self.points.len() {
            0 => f64::INFINITY,
            1 => q.distance(self.points[0]),
            _ => self
                .segments()
                .map(|(a, b)| point_segment_distance(q, a, b))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// Signed shoelace area of an implicitly closed polygon.
pub fn signed_area(points: &[Vec2]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let n = points.len();
    let twice: f64 = (0..n).map(|i| points[i].cross(points[(i + 1) % n])).sum();
    0.5 * twice
}

/// Winding number of the implicitly closed polygon around `q`
/// (positive for counter-clockwise).
pub fn winding_number(points: &[Vec2], q: Vec2) -> i32 {
    let n = points.len();
    if n < 3 {
        return 0;
    }
    let mut wn = 0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        let side = (b - a).cross(q - a);
        if a.y <= q.y {
            if b.y > q.y && side > 0.0 {
                wn += 1;
            }
        } else if b.y <= q.y && side < 0.0 {
            wn -= 1;
        }
    }
    wn
}

pub fn point_segment_distance(q: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return q.distance(a);
    }
    let t = ((q - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    q.distance(a + ab * t)
}

/// Directed Hausdorff distance: the largest distance from a vertex of
/// `from` to the nearest segment of `to`.
pub fn directed_hausdorff(from: &[Polyline], to: &[Polyline]) -> f64 {
    from.iter()
        .flat_map(|pl| pl.points.iter())
        .map(|&p| {
            to.iter()
                .map(|pl| pl.distance_to(p))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between two polyline sets.
pub fn hausdorff(a: &[Polyline], b: &[Polyline]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}
