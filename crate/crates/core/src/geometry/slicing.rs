//! Zero-mean slicing of a convex polygon into thin convex pieces.
//!
//! A trial function `u` with `∫ |u|^{p−2} u ω = 0` is given. Each step cuts a
//! piece along the area-bisecting line whose direction is chosen, by a
//! rotating-line intermediate value argument, so that both halves keep a
//! vanishing weighted p-mean. Recursion stops once every piece fits in a slab
//! `0 ≤ x₁ ≤ d_i, |x₂| ≤ ε` aligned with its Euclidean diameter chord.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::polygon::{direction, ConvexPolygon, Line};
use crate::geometry::quadrature::{adaptive_cells, integrate_adaptive, integrate_triangle, integrate_with, QuadratureOrder};
use crate::geometry::weight::Weight;
use crate::Vec2;

const OFFSET_BISECTION_ITERS: usize = 200;
const ANGLE_BISECTION_ITERS: usize = 60;
const SCAN_ANGLES: usize = 720;
const P_MEAN_REL_TOL: f64 = 1e-11;
const P_MEAN_MAX_REFINEMENTS: usize = 20_000;

/// Tolerances for the slicing procedure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlicingTolerances {
    /// Area tolerance relative to the area of the input polygon.
    pub area_rel: f64,
    /// p-mean residual tolerance relative to `∫_Ω ω`.
    pub mean: f64,
    /// Slab tolerance relative to the Euclidean diameter of the input polygon.
    pub mesh_rel: f64,
    /// Midpoint subdivisions of each fan triangle in the p-mean quadrature.
    pub quadrature_levels: u32,
}

impl Default for SlicingTolerances {
    fn default() -> Self {
        Self {
            area_rel: 1e-10,
            mean: 1e-8,
            mesh_rel: 1e-9,
            quadrature_levels: 3,
        }
    }
}

/// The integrand `|u|^{p−2} u ω` of the constraint.
pub struct PMeanField<'a> {
    pub u: &'a (dyn Fn(Vec2) -> f64 + Sync),
    pub weight: &'a Weight,
    pub p: f64,
}

impl PMeanField<'_> {
    pub fn density(&self, x: Vec2) -> f64 {
        let v = (self.u)(x);
        v.signum() * v.abs().powf(self.p - 1.0) * self.weight.eval(x)
    }

    /// `∫ |u|^{p−2} u ω`; adaptive, since the integrand has a kink on `{u = 0}`
    /// when `p ≠ 2`.
    pub fn p_mean(&self, poly: &ConvexPolygon, levels: u32) -> f64 {
        integrate_adaptive(
            poly,
            &|x| self.density(x),
            QuadratureOrder::Degree5,
            levels,
            P_MEAN_REL_TOL,
            P_MEAN_MAX_REFINEMENTS,
        )
    }

    pub fn weight_mass(&self, poly: &ConvexPolygon, levels: u32) -> f64 {
        integrate_with(poly, &|x| self.weight.eval(x), QuadratureOrder::Degree5, levels)
    }
}

/// The p-mean density integrated once over the adaptive cells of a root
/// polygon. A sub-polygon is measured by summing the cells it contains and
/// integrating only the cells its boundary cuts, so the two halves of a cut
/// add up to their parent up to the rule error on those few small cells.
struct PMeanAtlas<'a, 'f> {
    field: &'a PMeanField<'f>,
    cells: Vec<([Vec2; 3], f64)>,
    /// Vertices closer than this to an edge count as lying on it.
    on_edge: f64,
}

enum Placement {
    Inside,
    Outside,
    Cut,
}

/// Edges of a counterclockwise polygon as lines whose kept side is the interior.
fn edge_lines(poly: &ConvexPolygon) -> Vec<Line> {
    let v = poly.vertices();
    let n = v.len();
    (0..n)
        .map(|i| {
            let e = v[(i + 1) % n] - v[i];
            Line::new(v[i], Vec2::new(e.y, -e.x) / e.norm())
        })
        .collect()
}

fn place(tri: &[Vec2; 3], edges: &[Line], on_edge: f64) -> Placement {
    let mut inside = true;
    for line in edges {
        let d = tri.map(|x| line.signed_distance(x));
        if d.iter().all(|&d| d >= -on_edge) {
            return Placement::Outside;
        }
        if d.iter().any(|&d| d > on_edge) {
            inside = false;
        }
    }
    if inside {
        Placement::Inside
    } else {
        Placement::Cut
    }
}

/// Sutherland–Hodgman clip of a convex polygon by one half-plane.
fn clip(points: Vec<Vec2>, line: &Line) -> Vec<Vec2> {
    let n = points.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let (a, b) = (points[i], points[(i + 1) % n]);
        let (da, db) = (line.signed_distance(a), line.signed_distance(b));
        if da <= 0.0 {
            out.push(a);
        }
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            out.push(a + (b - a) * (da / (da - db)));
        }
    }
    out
}

impl<'a, 'f> PMeanAtlas<'a, 'f> {
    fn new(field: &'a PMeanField<'f>, poly: &ConvexPolygon, levels: u32) -> Self {
        let cells = adaptive_cells(
            poly,
            &|x| field.density(x),
            QuadratureOrder::Degree5,
            levels,
            P_MEAN_REL_TOL,
            P_MEAN_MAX_REFINEMENTS,
        );
        Self { field, cells, on_edge: 1e-12 * poly.scale() }
    }

    fn total(&self) -> f64 {
        self.cells.iter().map(|c| c.1).sum()
    }

    fn p_mean(&self, piece: &ConvexPolygon) -> f64 {
        let edges = edge_lines(piece);
        let density = |x: Vec2| self.field.density(x);
        self.cells
            .iter()
            .map(|(tri, value)| match place(tri, &edges, self.on_edge) {
                Placement::Inside => *value,
                Placement::Outside => 0.0,
                Placement::Cut => {
                    let part = edges.iter().fold(tri.to_vec(), |pts, line| clip(pts, line));
                    (1..part.len().saturating_sub(1))
                        .map(|i| integrate_triangle(part[0], part[i], part[i + 1], &density, QuadratureOrder::Degree5))
                        .sum()
                }
            })
            .sum()
    }

    /// The cells meeting `piece`.
    fn restrict(&self, piece: &ConvexPolygon) -> Self {
        let edges = edge_lines(piece);
        Self {
            field: self.field,
            cells: self
                .cells
                .iter()
                .filter(|(tri, _)| !matches!(place(tri, &edges, self.on_edge), Placement::Outside))
                .cloned()
                .collect(),
            on_edge: self.on_edge,
        }
    }
}

/// Root of a decreasing `f` on `[lo, hi]` with `f(lo) ≥ 0 ≥ f(hi)`, by the
/// Illinois variant of false position; stops once an iterate moves by less
/// than `xtol`.
fn illinois(
    f: &dyn Fn(f64) -> f64,
    (mut lo, mut r_lo): (f64, f64),
    (mut hi, mut r_hi): (f64, f64),
    xtol: f64,
) -> f64 {
    let mut side = 0i8;
    let mut prev = f64::NAN;
    for _ in 0..100 {
        if r_lo == 0.0 {
            return lo;
        }
        if r_hi == 0.0 || hi - lo <= xtol {
            return hi;
        }
        let mut t = (lo * r_hi - hi * r_lo) / (r_hi - r_lo);
        if !(t > lo && t < hi) {
            t = 0.5 * (lo + hi);
        }
        if (t - prev).abs() <= xtol {
            return t;
        }
        prev = t;
        let r = f(t);
        if r > 0.0 {
            (lo, r_lo) = (t, r);
            if side == 1 {
                r_hi *= 0.5;
            }
            side = 1;
        } else {
            (hi, r_hi) = (t, r);
            if side == -1 {
                r_lo *= 0.5;
            }
            side = -1;
        }
    }
    0.5 * (lo + hi)
}

/// Grows `[t − δ, t + δ]` until `f` changes sign across it.
fn bracket(f: &dyn Fn(f64) -> f64, t: f64, mut delta: f64) -> ((f64, f64), (f64, f64)) {
    let (mut lo, mut hi) = (t - delta, t + delta);
    let (mut r_lo, mut r_hi) = (f(lo), f(hi));
    while r_lo < 0.0 {
        delta *= 4.0;
        (hi, r_hi) = (lo, r_lo);
        lo = t - delta;
        r_lo = f(lo);
    }
    while r_hi > 0.0 {
        delta *= 4.0;
        (lo, r_lo) = (hi, r_hi);
        hi = t + delta;
        r_hi = f(hi);
    }
    ((lo, r_lo), (hi, r_hi))
}

/// The constant `t` for which `u − t` has vanishing weighted p-mean on `poly`
/// under the slicing quadrature. The residual is decreasing in `t`. A first
/// solve on the uniform rule locates `t`; the adaptive rule then refines it
/// from a tight bracket.
pub fn zero_p_mean_shift(
    poly: &ConvexPolygon,
    u: &(dyn Fn(Vec2) -> f64 + Sync),
    weight: &Weight,
    p: f64,
    levels: u32,
) -> f64 {
    let field = |t: f64| move |x: Vec2| u(x) - t;
    let coarse = |t: f64| {
        let shifted = field(t);
        let f = PMeanField { u: &shifted, weight, p };
        integrate_with(poly, &|x| f.density(x), QuadratureOrder::Degree5, levels)
    };
    let fine = |t: f64| {
        let shifted = field(t);
        PMeanField { u: &shifted, weight, p }.p_mean(poly, levels)
    };
    let samples: Vec<f64> = poly.vertices().iter().chain([poly.centroid()].iter()).map(|x| u(*x)).collect();
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = (hi - lo).max(1e-300);
    let (a, b) = bracket(&coarse, 0.5 * (lo + hi), 0.5 * range);
    let guess = illinois(&coarse, a, b, 1e-9 * range);
    let (a, b) = bracket(&fine, guess, 1e-3 * range);
    illinois(&fine, a, b, 1e-13 * range)
}

/// One cell of the slicing decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlicePiece {
    pub polygon: ConvexPolygon,
    /// Direction of the piece's Euclidean diameter chord (its `x₁` axis).
    pub axis_angle: f64,
    /// Extent along the axis.
    pub length: f64,
    /// Half of the extent across the axis.
    pub half_width: f64,
    pub p_mean_residual: f64,
    pub depth: usize,
}

impl SlicePiece {
    fn measure(polygon: ConvexPolygon, p_mean_residual: f64, depth: usize) -> Self {
        let pair = polygon.euclidean_diameter_pair();
        let chord = polygon.vertices()[pair.to] - polygon.vertices()[pair.from];
        let axis_angle = chord.y.atan2(chord.x);
        Self {
            length: polygon.width(axis_angle),
            half_width: 0.5 * polygon.width(axis_angle + FRAC_PI_2),
            axis_angle,
            polygon,
            p_mean_residual,
            depth,
        }
    }
}

fn area_below(poly: &ConvexPolygon, normal: Vec2, offset: f64) -> f64 {
    poly.clip_halfplane(&Line::new(normal * offset, normal))
        .map_or(0.0, |p| p.area())
}

/// The line with normal `direction(angle)` splitting `poly` into halves of
/// equal area, by bisection on the offset.
pub fn area_bisecting_line(poly: &ConvexPolygon, angle: f64) -> Line {
    let normal = direction(angle);
    let half = 0.5 * poly.area();
    let (mut lo, mut hi) = poly.support_interval(angle);
    for _ in 0..OFFSET_BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if area_below(poly, normal, mid) < half {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Line::new(normal * (0.5 * (lo + hi)), normal)
}

/// Halves of `poly` cut by the area-bisecting line parallel to
/// `direction(angle)`: `(left, right)` relative to that direction.
fn split_along(poly: &ConvexPolygon, angle: f64) -> Result<(Line, ConvexPolygon, ConvexPolygon)> {
    let line = area_bisecting_line(poly, angle + FRAC_PI_2);
    let left = poly.clip_halfplane(&line.flipped());
    let right = poly.clip_halfplane(&line);
    match (left, right) {
        (Some(l), Some(r)) => Ok((line, l, r)),
        _ => Err(Error::Degenerate(
            "area-bisecting cut produced an empty half".into(),
        )),
    }
}

/// Result of one zero-mean bisection step.
#[derive(Clone, Debug)]
pub struct Bisection {
    pub angle: f64,
    pub line: Line,
    pub left: ConvexPolygon,
    pub right: ConvexPolygon,
    pub left_residual: f64,
    pub right_residual: f64,
}

/// Finds a direction `θ*` whose area-bisecting cut leaves both halves with
/// vanishing p-mean.
///
/// `mass` is the reference `∫ ω` for the tolerance (the root domain's mass
/// during recursive slicing). The half left of `direction(θ)` carries
/// `g(θ)`, and `g(θ + π) = total − g(θ)`, so `g − total/2` changes sign on
/// `[0, π]`.
pub fn zero_mean_bisection(
    poly: &ConvexPolygon,
    field: &PMeanField<'_>,
    mass: f64,
    tol: &SlicingTolerances,
) -> Result<Bisection> {
    bisect(&PMeanAtlas::new(field, poly, tol.quadrature_levels), poly, mass, tol)
}

fn bisect(atlas: &PMeanAtlas<'_, '_>, poly: &ConvexPolygon, mass: f64, tol: &SlicingTolerances) -> Result<Bisection> {
    let total = atlas.p_mean(poly);
    let limit = tol.mean * mass;
    if total.abs() > limit {
        return Err(Error::Precondition(format!(
            "p-mean of the piece is {total:e}, above tolerance {limit:e}"
        )));
    }
    let target = 0.5 * total;
    let eval = |theta: f64| -> Result<(f64, Line, ConvexPolygon, ConvexPolygon)> {
        let (line, left, right) = split_along(poly, theta)?;
        Ok((atlas.p_mean(&left) - target, line, left, right))
    };
    let finish = |theta: f64,
                  (g, line, left, right): (f64, Line, ConvexPolygon, ConvexPolygon)|
     -> Result<Bisection> {
        let right_residual = atlas.p_mean(&right);
        let bis = Bisection {
            angle: theta,
            line,
            left,
            right,
            left_residual: g + target,
            right_residual,
        };
        if bis.left_residual.abs() > limit || bis.right_residual.abs() > limit {
            return Err(Error::Accuracy(format!(
                "bisection residuals {:e}, {:e} exceed {limit:e}",
                bis.left_residual, bis.right_residual
            )));
        }
        Ok(bis)
    };

    let at_zero = eval(0.0)?;
    let g0 = at_zero.0;
    // Anything below this is indistinguishable from a root.
    let root_tol = 0.01 * limit;
    if g0.abs() <= root_tol {
        return finish(0.0, at_zero);
    }
    let at_pi = eval(PI)?.0;
    let (mut lo, mut hi, mut g_lo) = if g0.signum() != at_pi.signum() {
        (0.0, PI, g0)
    } else {
        // Quadrature inconsistency between the halves hid the sign change;
        // fall back to a scan.
        let mut bracket = None;
        let mut prev = (0.0, g0);
        for k in 1..=SCAN_ANGLES {
            let theta = PI * k as f64 / SCAN_ANGLES as f64;
            let g = eval(theta)?.0;
            if g.signum() != prev.1.signum() || g.abs() <= root_tol {
                bracket = Some((prev.0, theta, prev.1));
                break;
            }
            prev = (theta, g);
        }
        bracket.ok_or_else(|| {
            Error::Accuracy("no sign change of the half p-mean on [0, π]".into())
        })?
    };
    let mut best = (lo, g_lo.abs());
    for _ in 0..ANGLE_BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        let g = eval(mid)?.0;
        if g.abs() < best.1 {
            best = (mid, g.abs());
        }
        if g.abs() <= root_tol {
            break;
        }
        if g.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
        }
    }
    let theta = best.0;
    finish(theta, eval(theta)?)
}

/// Recursive zero-mean slicing until every piece has `half_width ≤ eps`
/// (plus the slab tolerance) or `max_depth` is reached.
pub fn slice_decomposition(
    poly: &ConvexPolygon,
    field: &PMeanField<'_>,
    eps: f64,
    max_depth: usize,
    tol: &SlicingTolerances,
) -> Result<Vec<SlicePiece>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("slab half-width must be positive, got {eps}")));
    }
    let mass = field.weight_mass(poly, tol.quadrature_levels);
    let atlas = PMeanAtlas::new(field, poly, tol.quadrature_levels);
    let residual = atlas.total();
    if residual.abs() > tol.mean * mass {
        return Err(Error::Precondition(format!(
            "input p-mean {residual:e} exceeds {:e}",
            tol.mean * mass
        )));
    }
    let slab = eps + tol.mesh_rel * poly.euclidean_diameter();
    let ctx = SliceContext {
        mass,
        slab,
        max_depth,
        tol,
    };
    let mut pieces = Vec::new();
    let mut thick = Vec::new();
    ctx.recurse(&atlas, poly.clone(), residual, 0, &mut pieces, &mut thick)?;

    let area_sum: f64 = pieces.iter().chain(&thick).map(|p| p.polygon.area()).sum();
    let count = (pieces.len() + thick.len()) as f64;
    if (area_sum - poly.area()).abs() > count * tol.area_rel * poly.area() {
        return Err(Error::InvariantViolation(format!(
            "pieces cover area {area_sum}, polygon has {}",
            poly.area()
        )));
    }
    if !thick.is_empty() {
        pieces.extend(thick.iter().cloned());
        return Err(Error::PartialSlicing { pieces, thick });
    }
    Ok(pieces)
}

struct SliceContext<'a> {
    mass: f64,
    slab: f64,
    max_depth: usize,
    tol: &'a SlicingTolerances,
}

impl SliceContext<'_> {
    fn recurse(
        &self,
        atlas: &PMeanAtlas<'_, '_>,
        poly: ConvexPolygon,
        residual: f64,
        depth: usize,
        pieces: &mut Vec<SlicePiece>,
        thick: &mut Vec<SlicePiece>,
    ) -> Result<()> {
        let piece = SlicePiece::measure(poly, residual, depth);
        if piece.half_width <= self.slab {
            pieces.push(piece);
            return Ok(());
        }
        if depth >= self.max_depth {
            thick.push(piece);
            return Ok(());
        }
        let bis = bisect(atlas, &piece.polygon, self.mass, self.tol)?;
        let (left, right) = rayon::join(
            || {
                let (mut p, mut t) = (Vec::new(), Vec::new());
                self.recurse(&atlas.restrict(&bis.left), bis.left.clone(), bis.left_residual, depth + 1, &mut p, &mut t)
                    .map(|_| (p, t))
            },
            || {
                let (mut p, mut t) = (Vec::new(), Vec::new());
                self.recurse(&atlas.restrict(&bis.right), bis.right.clone(), bis.right_residual, depth + 1, &mut p, &mut t)
                    .map(|_| (p, t))
            },
        );
        for (p, t) in [left?, right?] {
            pieces.extend(p);
            thick.extend(t);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisector_of_square_is_midline() {
        let line = area_bisecting_line(&ConvexPolygon::unit_square(), 0.0);
        assert!((line.point.x - 0.5).abs() < 1e-14);
        assert_eq!(line.normal, Vec2::new(1.0, 0.0));
    }

    #[test]
    fn odd_field_on_square_admits_zero_angle() {
        let sq = ConvexPolygon::unit_square();
        let u = |x: Vec2| x.x - 0.5;
        let w = Weight::default();
        let field = PMeanField { u: &u, weight: &w, p: 2.0 };
        let tol = SlicingTolerances::default();
        let bis = zero_mean_bisection(&sq, &field, 1.0, &tol).unwrap();
        assert_eq!(bis.angle, 0.0);
        assert!(bis.left_residual.abs() <= 1e-8 && bis.right_residual.abs() <= 1e-8);
        assert!((bis.left.area() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_field_returns_zero_angle() {
        let sq = ConvexPolygon::unit_square();
        let u = |_: Vec2| 0.0;
        let w = Weight::default();
        let field = PMeanField { u: &u, weight: &w, p: 2.0 };
        let bis = zero_mean_bisection(&sq, &field, 1.0, &SlicingTolerances::default()).unwrap();
        assert_eq!(bis.angle, 0.0);
    }

    #[test]
    fn nonzero_mean_is_a_precondition_error() {
        let sq = ConvexPolygon::unit_square();
        let u = |_: Vec2| 1.0;
        let w = Weight::default();
        let field = PMeanField { u: &u, weight: &w, p: 2.0 };
        let err = zero_mean_bisection(&sq, &field, 1.0, &SlicingTolerances::default());
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn shift_zeroes_the_p_mean() {
        let tri = ConvexPolygon::from_pairs(&[[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]]).unwrap();
        let u = |x: Vec2| x.x * x.x + 0.3 * x.y;
        let w = Weight::exp_linear(Vec2::new(0.5, -1.0)).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let t = zero_p_mean_shift(&tri, &u, &w, p, 3);
            let shifted = move |x: Vec2| u(x) - t;
            let field = PMeanField { u: &shifted, weight: &w, p };
            assert!(field.p_mean(&tri, 3).abs() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn thin_rectangle_is_a_single_piece() {
        // Thinness is measured across the diagonal, the diameter chord.
        let r = ConvexPolygon::rectangle(1.0, 0.06);
        let u = |x: Vec2| x.x - 0.5;
        let w = Weight::default();
        let field = PMeanField { u: &u, weight: &w, p: 2.0 };
        let pieces =
            slice_decomposition(&r, &field, 0.06, 10, &SlicingTolerances::default()).unwrap();
        assert_eq!(pieces.len(), 1);
        assert_eq!(pieces[0].depth, 0);
        assert!((pieces[0].half_width - 0.06 / 1.0036f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn depth_limit_reports_partial_result() {
        let sq = ConvexPolygon::unit_square();
        let u = |x: Vec2| x.x - 0.5;
        let w = Weight::default();
        let field = PMeanField { u: &u, weight: &w, p: 2.0 };
        match slice_decomposition(&sq, &field, 0.01, 2, &SlicingTolerances::default()) {
            Err(Error::PartialSlicing { pieces, thick }) => {
                assert!(!thick.is_empty());
                let area: f64 = pieces.iter().map(|p| p.polygon.area()).sum();
                assert!((area - 1.0).abs() < 1e-9);
            }
            other => panic!("expected partial result, got {other:?}"),
        }
    }
}
