//! Minimal SVG writer for polygons, chords and heatmaps.

use std::fmt::Write;

use crate::geometry::polygon::ConvexPolygon;
use crate::geometry::slicing::SlicePiece;
use crate::Vec2;

/// Maps world coordinates onto a square canvas with the y axis pointing up.
#[derive(Clone, Copy, Debug)]
pub struct Viewport {
    lo: Vec2,
    scale: f64,
    size: f64,
    margin: f64,
}

impl Viewport {
    pub fn fit<'a>(points: impl IntoIterator<Item = &'a Vec2>, size: f64) -> Self {
        let mut lo = Vec2::repeat(f64::INFINITY);
        let mut hi = Vec2::repeat(f64::NEG_INFINITY);
        for p in points {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let extent = (hi - lo).max().max(1e-12);
        let margin = 0.05 * size;
        Self {
            lo,
            scale: (size - 2.0 * margin) / extent,
            size,
            margin,
        }
    }

    pub fn map(&self, p: Vec2) -> (f64, f64) {
        let x = self.margin + (p.x - self.lo.x) * self.scale;
        let y = self.size - self.margin - (p.y - self.lo.y) * self.scale;
        (x, y)
    }

    pub fn size(&self) -> f64 {
        self.size
    }
}

pub fn header(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

pub fn polygon_path(view: &Viewport, poly: &ConvexPolygon) -> String {
    let mut d = String::new();
    for (i, v) in poly.vertices().iter().enumerate() {
        let (x, y) = view.map(*v);
        let _ = write!(d, "{}{x:.3},{y:.3} ", if i == 0 { "M" } else { "L" });
    }
    d.push('Z');
    d
}

/// Colour for recursion depth `depth` out of `max`.
pub fn depth_colour(depth: usize, max: usize) -> String {
    let t = if max == 0 { 0.0 } else { depth as f64 / max as f64 };
    let r = (40.0 + 200.0 * t) as u8;
    let b = (220.0 - 180.0 * t) as u8;
    format!("rgb({r},60,{b})")
}

/// One path per slice piece over the parent outline, stroke coloured by depth.
pub fn slices_svg(parent: &ConvexPolygon, pieces: &[SlicePiece]) -> String {
    let view = Viewport::fit(parent.vertices(), 600.0);
    let mut out = header(600.0, 600.0);
    let max_depth = pieces.iter().map(|p| p.depth).max().unwrap_or(0);
    let _ = writeln!(
        out,
        "<path d=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>",
        polygon_path(&view, parent)
    );
    for piece in pieces {
        let _ = writeln!(
            out,
            "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1\" data-depth=\"{}\"/>",
            polygon_path(&view, &piece.polygon),
            depth_colour(piece.depth, max_depth),
            piece.depth
        );
    }
    out.push_str("</svg>\n");
    out
}
