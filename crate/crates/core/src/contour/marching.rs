//! Marching squares on a sampled scalar field, with saddle cells resolved
//! by the value at the cell centre.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::geometry::{Bounds, Vec2};

/// Scalar samples on the nodes of a regular `nx` x `ny` cell grid. Excluded
/// nodes hold NaN; every cell touching one is skipped.
#[derive(Debug, Clone)]
pub(crate) struct ScalarGrid {
    pub bounds: Bounds,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl ScalarGrid {
    /// Sample `f` on the nodes; rows are evaluated in parallel.
    pub fn sample<F>(bounds: Bounds, nx: usize, ny: usize, f: F) -> Self
    where
        F: Fn(Vec2) -> f64 + Sync,
    {
        let rows: Vec<Vec<f64>> = (0..=ny)
            .into_par_iter()
            .map(|j| (0..=nx).map(|i| f(node(&bounds, nx, ny, i, j))).collect())
            .collect();
        ScalarGrid {
            bounds,
            nx,
            ny,
            values: rows.into_iter().flatten().collect(),
        }
    }

    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        node(&self.bounds, self.nx, self.ny, i, j)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * (self.nx + 1) + i]
    }

    pub fn cell_diagonal(&self) -> f64 {
        let dx = self.bounds.width() / self.nx as f64;
        let dy = self.bounds.height() / self.ny as f64;
        dx.hypot(dy)
    }
}

fn node(bounds: &Bounds, nx: usize, ny: usize, i: usize, j: usize) -> Vec2 {
    Vec2::new(
        bounds.xmin + bounds.width() * (i as f64 / nx as f64),
        bounds.ymin + bounds.height() * (j as f64 / ny as f64),
    )
}

/// Grid edge holding a contour vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Edge {
    /// `(i, j) -- (i + 1, j)`
    Horizontal(usize, usize),
    /// `(i, j) -- (i, j + 1)`
    Vertical(usize, usize),
}

/// A chain of contour vertices before refinement.
#[derive(Debug, Clone)]
pub(crate) struct RawChain {
    pub points: Vec<Vec2>,
    pub closed: bool,
}

/// Extract the `level` set as chains of edge-interpolated points.
/// `center` evaluates the field at a cell centre for saddle cells.
pub(crate) fn extract<C>(
    grid: &ScalarGrid,
    level: f64,
    skip_cell: impl Fn(usize, usize) -> bool,
    center: C,
) -> Vec<RawChain>
where
    C: Fn(Vec2) -> f64,
{
    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let f = [
                grid.value(i, j),
                grid.value(i + 1, j),
                grid.value(i + 1, j + 1),
                grid.value(i, j + 1),
            ];
            if f.iter().any(|v| !v.is_finite()) || skip_cell(i, j) {
                continue;
            }
            let inside = f.map(|v| v >= level);
            let edges = [
                Edge::Horizontal(i, j),
                Edge::Vertical(i + 1, j),
                Edge::Horizontal(i, j + 1),
                Edge::Vertical(i, j),
            ];
            // edge k joins corners k and (k + 1) % 4
            let crossed: Vec<usize> = (0..4)
                .filter(|&k| inside[k] != inside[(k + 1) % 4])
                .collect();
            match crossed.len() {
                2 => segments.push((edges[crossed[0]], edges[crossed[1]])),
                4 => {
                    let mid = 0.5 * (grid.node(i, j) + grid.node(i + 1, j + 1));
                    let mut fc = center(mid);
                    if !fc.is_finite() {
                        fc = 0.25 * f.iter().sum::<f64>();
                    }
                    if (fc >= level) == inside[0] {
                        // corners 0 and 2 connect through the centre
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[3], edges[0]));
                        segments.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
        }
    }
    join(grid, level, &segments)
}

fn edge_point(grid: &ScalarGrid, level: f64, edge: Edge) -> Vec2 {
    let ((i0, j0), (i1, j1)) = match edge {
        Edge::Horizontal(i, j) => ((i, j), (i + 1, j)),
        Edge::Vertical(i, j) => ((i, j), (i, j + 1)),
    };
    let (f0, f1) = (grid.value(i0, j0), grid.value(i1, j1));
    let (p0, p1) = (grid.node(i0, j0), grid.node(i1, j1));
    let t = if f1 == f0 {
        0.5
    } else {
        ((level - f0) / (f1 - f0)).clamp(0.0, 1.0)
    };
    p0 + (p1 - p0) * t
}

fn join(grid: &ScalarGrid, level: f64, segments: &[(Edge, Edge)]) -> Vec<RawChain> {
    let mut at_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (idx, &(a, b)) in segments.iter().enumerate() {
        at_edge.entry(a).or_default().push(idx);
        at_edge.entry(b).or_default().push(idx);
    }
    let mut used = vec![false; segments.len()];
    let mut chains = Vec::new();

    let walk = |start_edge: Edge, start_seg: usize, used: &mut Vec<bool>| -> (Vec<Edge>, bool) {
        let mut edges = vec![start_edge];
        let mut seg = start_seg;
        let mut current = start_edge;
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let next = if a == current { b } else { a };
            if next == start_edge {
                edges.push(next);
                return (edges, true);
            }
            edges.push(next);
            current = next;
            match at_edge[&next].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => return (edges, false),
            }
        }
    };

    // open chains start at edges used by a single segment
    for idx in 0..segments.len() {
        if used[idx] {
            continue;
        }
        for end in [segments[idx].0, segments[idx].1] {
            if !used[idx] && at_edge[&end].len() == 1 {
                let (edges, closed) = walk(end, idx, &mut used);
                chains.push((edges, closed));
            }
        }
    }
    // whatever is left forms cycles
    for idx in 0..segments.len() {
        if !used[idx] {
            let (edges, closed) = walk(segments[idx].0, idx, &mut used);
            chains.push((edges, closed));
        }
    }

    chains
        .into_iter()
        .filter_map(|(edges, closed)| {
            let mut points: Vec<Vec2> = Vec::with_capacity(edges.len());
            for e in edges {
                let p = edge_point(grid, level, e);
                if points.last() != Some(&p) {
                    points.push(p);
                }
            }
            if closed && points.len() >= 2 && points.first() != points.last() {
                points.push(points[0]);
            }
            (points.len() >= 2).then_some(RawChain { points, closed })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_is_one_closed_chain() {
        let grid = ScalarGrid::sample(Bounds::centered_square(2.0), 40, 40, |p| p.norm());
        let chains = extract(&grid, 1.0, |_, _| false, |p| p.norm());
        assert_eq!(chains.len(), 1);
        let c = &chains[0];
        assert!(c.closed);
        assert_eq!(c.points.first(), c.points.last());
        for p in &c.points {
            assert!((p.norm() - 1.0).abs() < 5e-3);
        }
    }

    #[test]
    fn plane_gives_open_line() {
        let grid = ScalarGrid::sample(Bounds::new(-1.0, 1.0, -1.0, 1.0), 10, 10, |p| p.y);
        let chains = extract(&grid, 0.25, |_, _| false, |p| p.y);
        assert_eq!(chains.len(), 1);
        assert!(!chains[0].closed);
        assert!(chains[0].points.iter().all(|p| (p.y - 0.25).abs() < 1e-15));
        assert_eq!(chains[0].points.len(), 11);
    }

    #[test]
    fn saddle_cell_uses_centre_value() {
        // f = x y on a single cell: corners +,-,+,- around the cell.
        let grid = ScalarGrid::sample(Bounds::new(-1.0, 1.0, -1.0, 1.0), 1, 1, |p| p.x * p.y);
        let up = extract(&grid, 0.0, |_, _| false, |_| 1.0);
        let down = extract(&grid, 0.0, |_, _| false, |_| -1.0);
        assert_eq!(up.len(), 2);
        assert_eq!(down.len(), 2);
        assert_ne!(up[0].points, down[0].points);
    }

    #[test]
    fn nan_nodes_skip_cells() {
        let grid = ScalarGrid::sample(Bounds::centered_square(1.0), 10, 10, |p| {
            if p.norm() < 0.3 {
                f64::NAN
            } else {
                p.y
            }
        });
        let chains = extract(&grid, 0.0, |_, _| false, |p| p.y);
        // the line y = 0 is cut in two by the excluded hole
        assert_eq!(chains.len(), 2);
        assert!(chains.iter().all(|c| !c.closed));
    }
}
