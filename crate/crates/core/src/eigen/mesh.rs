use spade::{
    AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation,
};

use crate::error::{Error, Result};
use crate::geometry::polygon::ConvexPolygon;
use crate::Vec2;

/// Refuse meshes with more triangles than this.
pub const MAX_TRIANGLES: usize = 1_000_000;

const ANGLE_LIMIT_DEG: f64 = 25.0;

/// Conforming triangulation of a convex polygon.
#[derive(Clone, Debug)]
pub struct TriMesh {
    points: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
    h: f64,
}

impl TriMesh {
    /// Checks orientation and non-degeneracy; used for hand-built meshes.
    pub fn new(points: Vec<Vec2>, triangles: Vec<[usize; 3]>, h: f64) -> Result<Self> {
        for t in &triangles {
            if t.iter().any(|&i| i >= points.len()) {
                return Err(Error::InvalidInput(format!("triangle {t:?} indexes past the points")));
            }
            let area = signed_area(points[t[0]], points[t[1]], points[t[2]]);
            if !(area > 0.0) {
                return Err(Error::InvariantViolation(format!(
                    "triangle {t:?} is not positively oriented (signed area {area:e})"
                )));
            }
        }
        Ok(Self { points, triangles, h })
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn corners(&self, t: usize) -> [Vec2; 3] {
        self.triangles[t].map(|i| self.points[i])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        signed_area(a, b, c)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        let mut worst = 180.0f64;
        for t in 0..self.triangles.len() {
            let c = self.corners(t);
            for k in 0..3 {
                let (u, v) = (c[(k + 1) % 3] - c[k], c[(k + 2) % 3] - c[k]);
                worst = worst.min(u.angle(&v).to_degrees());
            }
        }
        worst
    }

    /// `Σ|T|/3` over the triangles around each node.
    pub fn lumped_areas(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.points.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            let a = self.triangle_area(t) / 3.0;
            for &i in tri {
                m[i] += a;
            }
        }
        m
    }
}

fn signed_area(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    0.5 * (b - a).perp(&(c - a))
}

/// Boundary nodes at spacing `≤ h`, an equilateral lattice of spacing `h`
/// kept `h/2` away from the boundary, then a constrained Delaunay
/// triangulation refined to a 25° minimum angle and `√3/4·h²·1.5` maximum area.
pub fn triangulate(poly: &ConvexPolygon, h: f64) -> Result<TriMesh> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!("mesh size must be positive, got {h}")));
    }
    let equilateral = 3f64.sqrt() / 4.0 * h * h;
    let estimate = 2.0 * poly.area() / equilateral;
    if estimate > MAX_TRIANGLES as f64 {
        return Err(Error::Budget(format!(
            "h = {h} needs about {estimate:.0} triangles (limit {MAX_TRIANGLES})"
        )));
    }

    let v = poly.vertices();
    let n = v.len();
    let mut points: Vec<Point2<f64>> = Vec::new();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        let k = ((b - a).norm() / h).ceil().max(1.0) as usize;
        for j in 0..k {
            let x = a + (b - a) * (j as f64 / k as f64);
            points.push(Point2::new(x.x, x.y));
        }
    }
    let nb = points.len();
    let edges: Vec<[usize; 2]> = (0..nb).map(|i| [i, (i + 1) % nb]).collect();

    let edge_normals: Vec<(Vec2, Vec2)> = (0..n)
        .map(|i| {
            let e = v[(i + 1) % n] - v[i];
            (v[i], Vec2::new(-e.y, e.x) / e.norm())
        })
        .collect();
    let clearance = |x: Vec2| {
        edge_normals
            .iter()
            .map(|(a, nrm)| (x - a).dot(nrm))
            .fold(f64::INFINITY, f64::min)
    };
    let (lo, hi) = v.iter().fold(
        (Vec2::repeat(f64::INFINITY), Vec2::repeat(f64::NEG_INFINITY)),
        |(lo, hi), p| (lo.inf(p), hi.sup(p)),
    );
    let dy = h * 3f64.sqrt() / 2.0;
    let rows = ((hi.y - lo.y) / dy).floor() as usize;
    for r in 0..=rows {
        let y = lo.y + r as f64 * dy;
        let offset = if r % 2 == 1 { 0.5 * h } else { 0.0 };
        let cols = ((hi.x - lo.x) / h).floor() as usize + 1;
        for c in 0..=cols {
            let x = Vec2::new(lo.x + offset + c as f64 * h, y);
            if clearance(x) >= 0.5 * h {
                points.push(Point2::new(x.x, x.y));
            }
        }
    }

    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(points, edges)
        .map_err(|e| Error::InvariantViolation(format!("triangulation failed: {e:?}")))?;
    let result = cdt.refine(
        RefinementParameters::new()
            .with_angle_limit(AngleLimit::from_deg(ANGLE_LIMIT_DEG))
            .with_max_allowed_area(1.5 * equilateral)
            .with_max_additional_vertices(MAX_TRIANGLES)
            .exclude_outer_faces(true),
    );
    let excluded: std::collections::HashSet<_> = result.excluded_faces.iter().copied().collect();

    let pts: Vec<Vec2> = cdt.vertices().map(|p| Vec2::new(p.position().x, p.position().y)).collect();
    let mut tris = Vec::with_capacity(cdt.num_inner_faces());
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        let mut t = face.vertices().map(|vh| vh.fix().index());
        if signed_area(pts[t[0]], pts[t[1]], pts[t[2]]) < 0.0 {
            t.swap(1, 2);
        }
        tris.push(t);
    }
    if tris.len() > MAX_TRIANGLES {
        return Err(Error::Budget(format!("mesh has {} triangles (limit {MAX_TRIANGLES})", tris.len())));
    }
    let mesh = TriMesh::new(pts, tris, h)?;
    let covered = mesh.total_area();
    if (covered - poly.area()).abs() > 1e-9 * poly.area() {
        return Err(Error::InvariantViolation(format!(
            "mesh covers area {covered}, polygon has {}",
            poly.area()
        )));
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_area_and_quality() {
        let m = triangulate(&ConvexPolygon::unit_square(), 0.1).unwrap();
        assert!((m.total_area() - 1.0).abs() < 1e-9);
        assert!(m.min_angle_deg() >= 20.0, "{}", m.min_angle_deg());
        let lumped: f64 = m.lumped_areas().iter().sum();
        assert!((lumped - 1.0).abs() < 1e-9);
    }

    #[test]
    fn halving_h_quadruples_triangles() {
        let sq = ConvexPolygon::unit_square();
        let a = triangulate(&sq, 0.1).unwrap().triangles().len() as f64;
        let b = triangulate(&sq, 0.05).unwrap().triangles().len() as f64;
        assert!((3.5..=4.5).contains(&(b / a)), "{a} -> {b}");
    }

    #[test]
    fn tiny_h_exceeds_budget() {
        assert!(matches!(triangulate(&ConvexPolygon::unit_square(), 1e-4), Err(Error::Budget(_))));
        assert!(triangulate(&ConvexPolygon::unit_square(), 0.0).is_err());
    }

    #[test]
    fn hand_built_mesh_must_be_oriented() {
        let pts = vec![Vec2::zeros(), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        assert!(TriMesh::new(pts.clone(), vec![[0, 1, 2]], 1.0).is_ok());
        assert!(matches!(TriMesh::new(pts, vec![[0, 2, 1]], 1.0), Err(Error::InvariantViolation(_))));
    }
}
