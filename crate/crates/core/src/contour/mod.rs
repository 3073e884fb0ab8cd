//! Streamlines as level curves of the stream function, phase portraits and
//! circulation by contour quadrature.

mod circulation;
mod marching;

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::critical;
use crate::error::{FlowError, Result};
use crate::field::{self, FlowParams};
use crate::geometry::{Bounds, Polyline, Vec2};

use marching::{RawChain, ScalarGrid};

pub use circulation::{circulation, circulation_from_flux, CirculationResult};

/// Minimum number of cells per axis.
pub const MIN_CELLS: usize = 8;
/// Number of automatic quantile levels.
pub const DEFAULT_AUTO_LEVELS: usize = 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelSelection {
    Explicit(Vec<f64>),
    /// Quantiles of the stream function over the grid.
    Auto(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortraitSpec {
    pub bbox: Bounds,
    /// Cells along x.
    pub nx: usize,
    /// Cells along y.
    pub ny: usize,
    pub levels: LevelSelection,
    pub include_separatrix: bool,
}

impl PortraitSpec {
    pub fn new(bbox: Bounds, nx: usize, ny: usize) -> Self {
        PortraitSpec {
            bbox,
            nx,
            ny,
            levels: LevelSelection::Auto(DEFAULT_AUTO_LEVELS),
            include_separatrix: true,
        }
    }

    pub fn with_levels(mut self, levels: LevelSelection) -> Self {
        self.levels = levels;
        self
    }

    pub fn with_separatrix(mut self, include: bool) -> Self {
        self.include_separatrix = include;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.bbox.is_valid() {
            return Err(FlowError::InvalidParams(format!(
                "bounding box {:?} is empty or not finite",
                self.bbox
            )));
        }
        if self.nx < MIN_CELLS || self.ny < MIN_CELLS {
            return Err(FlowError::InvalidParams(format!(
                "grid must have at least {MIN_CELLS} cells per axis, got {}x{}",
                self.nx, self.ny
            )));
        }
        match &self.levels {
            LevelSelection::Explicit(v) if v.iter().any(|l| !l.is_finite()) => Err(
                FlowError::InvalidParams("contour levels must be finite".into()),
            ),
            LevelSelection::Auto(0) => Err(FlowError::InvalidParams(
                "automatic level count must be positive".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn cell_diagonal(&self) -> f64 {
        (self.bbox.width() / self.nx as f64).hypot(self.bbox.height() / self.ny as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Portrait {
    /// Levels in ascending order, including the separatrix level if requested.
    pub levels: Vec<f64>,
    pub separatrix_level: Option<f64>,
    /// Curves grouped by ascending level; within a level ordered by their
    /// leftmost-lowest starting vertex.
    pub curves: Vec<Polyline>,
}

impl Portrait {
    pub fn curves_at(&self, level: f64) -> impl Iterator<Item = &Polyline> {
        self.curves.iter().filter(move |c| c.level == Some(level))
    }

    pub fn is_separatrix(&self, curve: &Polyline) -> bool {
        self.separatrix_level.is_some() && curve.level == self.separatrix_level
    }
}

/// Grid cells closer than this to the origin are not contoured.
fn core_radius(params: &FlowParams) -> f64 {
    1e-4 * params.length_scale()
}

/// Magnitude against which level errors are judged: the level itself, or
/// the stream-function variation over one length scale if larger.
pub fn level_scale(params: &FlowParams, level: f64) -> f64 {
    level
        .abs()
        .max(params.a() * params.length_scale() + params.b())
        .max(f64::MIN_POSITIVE)
}

struct Contourer<'a> {
    params: &'a FlowParams,
    grid: ScalarGrid,
    core: f64,
}

impl<'a> Contourer<'a> {
    fn new(params: &'a FlowParams, spec: &PortraitSpec) -> Self {
        let core = core_radius(params);
        let vortex = params.has_vortex();
        let grid = ScalarGrid::sample(spec.bbox, spec.nx, spec.ny, |p| {
            if vortex && p.norm() < core {
                f64::NAN
            } else {
                field::stream_function(params, p).unwrap_or(f64::NAN)
            }
        });
        Contourer { params, grid, core }
    }

    fn psi(&self, p: Vec2) -> f64 {
        if self.params.has_vortex() && p.norm() < self.core {
            f64::NAN
        } else {
            field::stream_function(self.params, p).unwrap_or(f64::NAN)
        }
    }

    fn cell_contains_origin(&self, i: usize, j: usize) -> bool {
        if !self.params.has_vortex() {
            return false;
        }
        let lo = self.grid.node(i, j);
        let hi = self.grid.node(i + 1, j + 1);
        lo.x <= 0.0 && hi.x >= 0.0 && lo.y <= 0.0 && hi.y >= 0.0
    }

    /// Newton projection along the gradient of psi. One step is taken; if
    /// the residual still exceeds `RETRY_FRACTION` of the level scale (a
    /// curve barely resolved by the grid, close to the vortex) the
    /// iteration continues until it stops improving. A step must reduce the residual
    /// and the total move stays within half a cell, otherwise the last
    /// accepted point is kept.
    fn project(&self, p: Vec2, level: f64) -> Vec2 {
        const MAX_STEPS: usize = 6;
        const RETRY_FRACTION: f64 = 1e-4;
        let reach = 0.5 * self.grid.cell_diagonal();
        let retry = RETRY_FRACTION * level_scale(self.params, level);
        let mut q = p;
        let mut residual = self.psi(q) - level;
        let mut polish = false;
        for step in 0..MAX_STEPS {
            if step == 1 {
                polish = residual.abs() > retry;
            }
            if !residual.is_finite() || residual == 0.0 || (step > 0 && !polish) {
                break;
            }
            let Ok(j) = field::current(self.params, q) else {
                break;
            };
            // grad psi = (-v, u)
            let grad = Vec2::new(-j.y, j.x);
            let g2 = grad.norm_sq();
            if g2 == 0.0 {
                break;
            }
            let next = q + grad * (-residual / g2);
            if next.distance(p) > reach {
                break;
            }
            let next_residual = self.psi(next) - level;
            if !(next_residual.is_finite() && next_residual.abs() < residual.abs()) {
                break;
            }
            q = next;
            residual = next_residual;
        }
        q
    }

    fn refine(&self, chain: RawChain, level: f64) -> Option<Polyline> {
        let projected: Vec<Vec2> = chain
            .points
            .iter()
            .map(|&p| self.project(p, level))
            .collect();
        let mut points: Vec<Vec2> = Vec::with_capacity(2 * projected.len());
        for w in projected.windows(2) {
            push_distinct(&mut points, w[0]);
            push_distinct(&mut points, self.project(0.5 * (w[0] + w[1]), level));
        }
        if let Some(&last) = projected.last() {
            push_distinct(&mut points, last);
        }
        if points.len() < 2 {
            return None;
        }
        Some(normalize(Polyline::new(points, Some(level), chain.closed)))
    }

    fn level_curves(&self, level: f64) -> Vec<Polyline> {
        let chains = marching::extract(
            &self.grid,
            level,
            |i, j| self.cell_contains_origin(i, j),
            |p| self.psi(p),
        );
        let mut curves: Vec<Polyline> = chains
            .into_iter()
            .filter_map(|c| self.refine(c, level))
            .collect();
        curves.sort_by(|a, b| compare_points(a.points[0], b.points[0]));
        curves
    }
}

fn push_distinct(points: &mut Vec<Vec2>, p: Vec2) {
    const MIN_GAP: f64 = 1e-12;
    if points.last().is_none_or(|q| q.distance(p) > MIN_GAP) {
        points.push(p);
    }
}

fn compare_points(a: Vec2, b: Vec2) -> Ordering {
    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y))
}

/// Start closed curves at their leftmost-lowest vertex and orient open
/// curves so that the smaller endpoint comes first.
fn normalize(mut curve: Polyline) -> Polyline {
    if curve.closed {
        let mut ring: Vec<Vec2> = curve.points.clone();
        if ring.len() > 1 && ring.first() == ring.last() {
            ring.pop();
        }
        let start = (0..ring.len())
            .min_by(|&a, &b| compare_points(ring[a], ring[b]))
            .unwrap_or(0);
        ring.rotate_left(start);
        ring.push(ring[0]);
        curve.points = ring;
    } else if compare_points(curve.points[curve.points.len() - 1], curve.points[0])
        == Ordering::Less
    {
        curve.points.reverse();
    }
    curve
}

/// Streamlines `{psi = level}` inside the spec's box.
pub fn level_curves(params: &FlowParams, level: f64, spec: &PortraitSpec) -> Result<Vec<Polyline>> {
    spec.validate()?;
    if !level.is_finite() {
        return Err(FlowError::InvalidParams(
            "contour level must be finite".into(),
        ));
    }
    Ok(Contourer::new(params, spec).level_curves(level))
}

/// Level curves over the requested (or automatic) levels plus, optionally,
/// the separatrix level.
pub fn portrait(params: &FlowParams, spec: &PortraitSpec) -> Result<Portrait> {
    spec.validate()?;
    let contourer = Contourer::new(params, spec);
    let mut levels = match &spec.levels {
        LevelSelection::Explicit(levels) => levels.clone(),
        LevelSelection::Auto(n) => auto_levels(&contourer, params, *n),
    };
    let separatrix_level = if spec.include_separatrix {
        critical::separatrix_level(params).ok()
    } else {
        None
    };
    levels.extend(separatrix_level);
    levels.sort_by(f64::total_cmp);
    levels.dedup();

    let curves: Vec<Vec<Polyline>> = levels
        .par_iter()
        .map(|&level| contourer.level_curves(level))
        .collect();
    Ok(Portrait {
        levels,
        separatrix_level,
        curves: curves.into_iter().flatten().collect(),
    })
}

/// Quantiles of psi over the grid nodes, skipping a neighbourhood of the
/// vortex where psi diverges.
fn auto_levels(contourer: &Contourer<'_>, params: &FlowParams, n: usize) -> Vec<f64> {
    let grid = &contourer.grid;
    let exclusion = if params.has_vortex() {
        (0.25 * params.length_scale()).max(grid.cell_diagonal())
    } else {
        0.0
    };
    let mut values: Vec<f64> = (0..=grid.ny)
        .flat_map(|j| (0..=grid.nx).map(move |i| (i, j)))
        .filter(|&(i, j)| grid.node(i, j).norm() >= exclusion)
        .map(|(i, j)| grid.value(i, j))
        .filter(|v| v.is_finite())
        .collect();
    if values.is_empty() {
        return Vec::new();
    }
    values.sort_by(f64::total_cmp);
    let last = (values.len() - 1) as f64;
    (0..n)
        .map(|i| {
            let q = (i as f64 + 0.5) / n as f64;
            let pos = q * last;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let frac = pos - lo as f64;
            values[lo] + (values[hi] - values[lo]) * frac
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(nx: usize, ny: usize) -> PortraitSpec {
        PortraitSpec::new(Bounds::new(-4.0, 4.0, -3.0, 3.0), nx, ny)
    }

    #[test]
    fn spec_validation() {
        assert!(spec(8, 8).validate().is_ok());
        assert!(spec(7, 8).validate().is_err());
        let bad = PortraitSpec::new(Bounds::new(1.0, -1.0, 0.0, 1.0), 10, 10);
        assert!(bad.validate().is_err());
        assert!(spec(10, 10)
            .with_levels(LevelSelection::Explicit(vec![f64::NAN]))
            .validate()
            .is_err());
    }

    #[test]
    fn parallel_flow_gives_horizontal_line() {
        let params = FlowParams::natural(1.0, 0.0).unwrap();
        let curves = level_curves(&params, -2.0, &spec(40, 30)).unwrap();
        assert_eq!(curves.len(), 1);
        let c = &curves[0];
        assert!(!c.closed);
        assert!(c.points.iter().all(|p| (p.y - 2.0).abs() < 1e-12));
        assert!((c.points[0].x + 4.0).abs() < 1e-12);
        assert!((c.points[c.len() - 1].x - 4.0).abs() < 1e-12);
    }

    #[test]
    fn pure_rotation_gives_circle() {
        let params = FlowParams::new(1.0, 1.0, 0.0, 0.5).unwrap();
        let r0: f64 = 1.7;
        let curves = level_curves(&params, 0.5 * r0.ln(), &spec(80, 60)).unwrap();
        assert_eq!(curves.len(), 1);
        assert!(curves[0].closed);
        for p in &curves[0].points {
            assert!((p.norm() - r0).abs() < 1e-6, "{}", p.norm());
        }
    }

    #[test]
    fn level_set_missing_the_box_is_empty() {
        let params = FlowParams::natural(1.0, 0.0).unwrap();
        assert!(level_curves(&params, 10.0, &spec(20, 20))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn closed_curves_repeat_their_first_vertex() {
        let params = FlowParams::natural(1.0, 0.5).unwrap();
        let curves = level_curves(&params, -1.2, &spec(200, 150)).unwrap();
        let closed: Vec<_> = curves.iter().filter(|c| c.closed).collect();
        assert!(!closed.is_empty());
        for c in closed {
            assert_eq!(c.points.first(), c.points.last());
            assert!(c.points.windows(2).all(|w| w[0] != w[1]));
            assert_eq!(c.winding_number(Vec2::ZERO).abs(), 1);
        }
    }

    #[test]
    fn auto_levels_include_separatrix() {
        let params = FlowParams::natural(1.0, 0.5).unwrap();
        let p = portrait(&params, &spec(40, 30)).unwrap();
        assert_eq!(p.levels.len(), DEFAULT_AUTO_LEVELS + 1);
        let sep = p.separatrix_level.unwrap();
        assert!(p.levels.contains(&sep));
        assert!(p.levels.windows(2).all(|w| w[0] < w[1]));
        assert!(p.curves_at(sep).count() >= 1);
    }
}
