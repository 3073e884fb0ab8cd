//! Minimal SVG rendering of polylines and critical points, y-axis up.

use std::fmt::Write;

use abflow::{Bounds, Polyline, Vec2};

const WIDTH: f64 = 800.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stroke {
    Solid,
    Dashed,
}

#[derive(Debug, Default)]
pub struct Scene<'a> {
    pub curves: Vec<(&'a Polyline, Stroke)>,
    pub saddles: Vec<Vec2>,
    pub vortices: Vec<Vec2>,
}

struct Frame {
    bbox: Bounds,
    scale: f64,
}

impl Frame {
    fn map(&self, p: Vec2) -> (f64, f64) {
        (
            (p.x - self.bbox.xmin) * self.scale,
            (self.bbox.ymax - p.y) * self.scale,
        )
    }
}

pub fn render(bbox: Bounds, scene: &Scene<'_>) -> String {
    let frame = Frame {
        bbox,
        scale: WIDTH / bbox.width(),
    };
    let height = bbox.height() * frame.scale;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.3}" viewBox="0 0 {WIDTH:.0} {height:.3}">"#
    );
    let _ = writeln!(
        out,
        r#"<defs><clipPath id="frame"><rect x="0" y="0" width="{WIDTH:.0}" height="{height:.3}"/></clipPath></defs>"#
    );
    let _ = writeln!(
        out,
        r##"<rect x="0" y="0" width="{WIDTH:.0}" height="{height:.3}" fill="#ffffff" stroke="#000000"/>"##
    );
    let _ = writeln!(out, r#"<g clip-path="url(#frame)" fill="none">"#);
    for (curve, stroke) in &scene.curves {
        if curve.points.len() < 2 {
            continue;
        }
        let mut points = String::new();
        for (i, &p) in curve.points.iter().enumerate() {
            let (x, y) = frame.map(p);
            if i > 0 {
                points.push(' ');
            }
            let _ = write!(points, "{x:.3},{y:.3}");
        }
        let style = match stroke {
            Stroke::Solid => r##"stroke="#1f4e99" stroke-width="1""##,
            Stroke::Dashed => r##"stroke="#c0392b" stroke-width="1.5" stroke-dasharray="6,4""##,
        };
        let _ = writeln!(out, r#"<polyline points="{points}" {style}/>"#);
    }
    for &s in &scene.saddles {
        let (x, y) = frame.map(s);
        let d = 6.0;
        let _ = writeln!(
            out,
            r##"<path d="M {:.3} {:.3} L {:.3} {:.3} M {:.3} {:.3} L {:.3} {:.3}" stroke="#000000" stroke-width="2"/>"##,
            x - d,
            y - d,
            x + d,
            y + d,
            x - d,
            y + d,
            x + d,
            y - d
        );
    }
    for &v in &scene.vortices {
        let (x, y) = frame.map(v);
        let _ = writeln!(
            out,
            r##"<circle cx="{x:.3}" cy="{y:.3}" r="4" fill="#000000"/>"##
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn y_axis_points_up() {
        let bbox = Bounds::new(-1.0, 1.0, -1.0, 1.0);
        let line = Polyline::new(
            vec![Vec2::new(-1.0, 1.0), Vec2::new(1.0, -1.0)],
            None,
            false,
        );
        let scene = Scene {
            curves: vec![(&line, Stroke::Dashed)],
            saddles: vec![Vec2::new(0.0, 0.5)],
            vortices: vec![Vec2::ZERO],
        };
        let svg = render(bbox, &scene);
        // top-left in the plane maps to the SVG origin
        assert!(svg.contains(r#"points="0.000,0.000 800.000,800.000""#));
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains(r#"<circle cx="400.000" cy="400.000""#));
        assert!(svg.contains("M 394.000 194.000 L 406.000 206.000"));
    }
}
