//! Convex polygons in counterclockwise order.

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::anisotropy::{Anisotropy, DirectionGrid};
use crate::error::{Error, Result};
use crate::Vec2;

/// Relative tolerance on turn cross products (scaled by `scale²`).
const CONVEXITY_TOL: f64 = 1e-12;
/// Relative distance under which clipped vertices are merged.
const MERGE_TOL: f64 = 1e-13;

/// A line given by a point and a normal; the kept side of a clip is
/// `{x : ⟨x - point, normal⟩ ≤ 0}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line {
    pub point: Vec2,
    pub normal: Vec2,
}

impl Line {
    pub fn new(point: Vec2, normal: Vec2) -> Self {
        Self { point, normal }
    }

    pub fn signed_distance(&self, x: Vec2) -> f64 {
        (x - self.point).dot(&self.normal) / self.normal.norm()
    }

    pub fn flipped(&self) -> Self {
        Self {
            point: self.point,
            normal: -self.normal,
        }
    }
}

/// A bounded convex polygon with counterclockwise vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Vec2>,
}

/// A pair of vertex indices with the value it attains.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiameterPair {
    pub from: usize,
    pub to: usize,
    pub value: f64,
}

fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

pub(crate) fn direction(angle: f64) -> Vec2 {
    Vec2::new(angle.cos(), angle.sin())
}

fn shoelace(vertices: &[Vec2]) -> f64 {
    let n = vertices.len();
    0.5 * (0..n)
        .map(|i| cross(vertices[i], vertices[(i + 1) % n]))
        .sum::<f64>()
}

fn bbox_scale(vertices: &[Vec2]) -> f64 {
    let (mut lo, mut hi) = (vertices[0], vertices[0]);
    for v in vertices {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    (hi - lo).norm()
}

impl ConvexPolygon {
    /// Validates that `vertices` describe a convex polygon traversed once
    /// counterclockwise with nonzero area. Collinear vertices are allowed.
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidInput(format!(
                "polygon needs at least 3 vertices, got {n}"
            )));
        }
        if vertices.iter().any(|v| !(v.x.is_finite() && v.y.is_finite())) {
            return Err(Error::InvalidInput("polygon vertex is not finite".into()));
        }
        let scale = bbox_scale(&vertices);
        if scale == 0.0 {
            return Err(Error::InvalidInput("polygon has zero extent".into()));
        }
        let mut turning = 0.0;
        for i in 0..n {
            let prev = vertices[(i + n - 1) % n];
            let cur = vertices[i];
            let next = vertices[(i + 1) % n];
            let (e0, e1) = (cur - prev, next - cur);
            if e1.norm() <= 1e-15 * scale {
                return Err(Error::InvalidInput(format!(
                    "polygon has a repeated vertex at index {i}"
                )));
            }
            let turn = cross(e0, e1);
            if turn < -CONVEXITY_TOL * scale * scale {
                return Err(Error::InvalidInput(format!(
                    "polygon is not convex and counterclockwise at vertex {i}"
                )));
            }
            turning += turn.atan2(e0.dot(&e1));
        }
        if (turning - TAU).abs() > 1e-6 {
            return Err(Error::InvalidInput(format!(
                "polygon boundary winds {:.3} turns, expected exactly one",
                turning / TAU
            )));
        }
        if shoelace(&vertices) <= 1e-12 * scale * scale {
            return Err(Error::InvalidInput("polygon has zero area".into()));
        }
        Ok(Self { vertices })
    }

    /// Builds a polygon from `[[x, y], ...]` pairs.
    pub fn from_pairs(pairs: &[[f64; 2]]) -> Result<Self> {
        Self::new(pairs.iter().map(|p| Vec2::new(p[0], p[1])).collect())
    }

    pub fn unit_square() -> Self {
        Self::rectangle(1.0, 1.0)
    }

    /// `[0, width] × [0, height]`.
    pub fn rectangle(width: f64, height: f64) -> Self {
        Self::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(width, 0.0),
            Vec2::new(width, height),
            Vec2::new(0.0, height),
        ])
        .expect("rectangle with positive sides")
    }

    /// Regular `n`-gon of circumradius `radius` centred at the origin.
    pub fn regular(n: usize, radius: f64) -> Result<Self> {
        Self::new(
            (0..n)
                .map(|k| direction(TAU * k as f64 / n as f64) * radius)
                .collect(),
        )
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    /// Length of the bounding-box diagonal; the reference length for tolerances.
    pub fn scale(&self) -> f64 {
        bbox_scale(&self.vertices)
    }

    pub fn vertex_mean(&self) -> Vec2 {
        self.vertices.iter().sum::<Vec2>() / self.vertices.len() as f64
    }

    /// Area centroid.
    pub fn centroid(&self) -> Vec2 {
        let n = self.vertices.len();
        let mut acc = Vec2::zeros();
        for i in 0..n {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
            acc += (a + b) * cross(a, b);
        }
        acc / (6.0 * self.area())
    }

    pub fn map(&self, f: impl Fn(Vec2) -> Vec2) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        assert!(factor > 0.0, "scale factor must be positive");
        self.map(|v| v * factor)
    }

    /// Counterclockwise rotation about the origin.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        self.map(|v| Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y))
    }

    pub fn translated(&self, offset: Vec2) -> Self {
        self.map(|v| v + offset)
    }

    pub fn contains(&self, x: Vec2, tol: f64) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
            cross(b - a, x - a) >= -tol * (b - a).norm()
        })
    }

    /// `(min, max)` of `⟨v, direction(angle)⟩` over the polygon.
    pub fn support_interval(&self, angle: f64) -> (f64, f64) {
        let d = direction(angle);
        self.vertices
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                let s = v.dot(&d);
                (lo.min(s), hi.max(s))
            })
    }

    /// Extent of the polygon along `direction(angle)`.
    pub fn width(&self, angle: f64) -> f64 {
        let (lo, hi) = self.support_interval(angle);
        hi - lo
    }

    /// Maximum Euclidean distance between two vertices, with the first
    /// attaining pair in lexicographic order.
    pub fn euclidean_diameter_pair(&self) -> DiameterPair {
        let n = self.vertices.len();
        let mut best = DiameterPair {
            from: 0,
            to: 1,
            value: f64::NEG_INFINITY,
        };
        for i in 0..n {
            for j in i + 1..n {
                let d = (self.vertices[j] - self.vertices[i]).norm();
                if d > best.value {
                    best = DiameterPair {
                        from: i,
                        to: j,
                        value: d,
                    };
                }
            }
        }
        best
    }

    pub fn euclidean_diameter(&self) -> f64 {
        self.euclidean_diameter_pair().value
    }

    /// Unordered antipodal vertex pairs `(i, j)`, `i < j`: pairs admitting
    /// parallel supporting lines. Every pair is an endpoint of some edge
    /// together with a vertex farthest from that edge's line.
    pub fn antipodal_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.vertices.len();
        let scale = self.scale();
        let mut pairs = BTreeSet::new();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let e = (b - a) / (b - a).norm();
            let dist: Vec<f64> = self.vertices.iter().map(|&v| cross(e, v - a)).collect();
            let far = dist.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let cutoff = far - 1e-9 * scale;
            for (k, &d) in dist.iter().enumerate() {
                if d >= cutoff {
                    for end in [i, (i + 1) % n] {
                        if end != k {
                            pairs.insert((end.min(k), end.max(k)));
                        }
                    }
                }
            }
        }
        pairs.into_iter().collect()
    }

    /// `D_H(Ω) = sup_{x,y∈Ω} H°(y − x)` with the attaining ordered pair
    /// (`from` = x, `to` = y).
    ///
    /// `H°` is convex, so the supremum is attained at a pair of vertices, and
    /// for each direction the largest difference is attained by an antipodal
    /// pair; only those pairs are evaluated, in both orders.
    pub fn anisotropic_diameter_pair(
        &self,
        aniso: &Anisotropy,
        grid: &DirectionGrid,
    ) -> Result<DiameterPair> {
        let mut ordered: Vec<(usize, usize)> = self
            .antipodal_pairs()
            .into_iter()
            .flat_map(|(i, j)| [(i, j), (j, i)])
            .collect();
        ordered.sort_unstable();
        let mut best = DiameterPair {
            from: 0,
            to: 1,
            value: f64::NEG_INFINITY,
        };
        for (i, j) in ordered {
            let value = aniso.polar(self.vertices[j] - self.vertices[i], grid)?;
            if value > best.value {
                best = DiameterPair {
                    from: i,
                    to: j,
                    value,
                };
            }
        }
        if !(best.value > 0.0 && best.value.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "anisotropic diameter evaluated to {}",
                best.value
            )));
        }
        Ok(best)
    }

    pub fn anisotropic_diameter(&self, aniso: &Anisotropy, grid: &DirectionGrid) -> Result<f64> {
        Ok(self.anisotropic_diameter_pair(aniso, grid)?.value)
    }

    /// Intersection with `{x : ⟨x − point, normal⟩ ≤ 0}`; `None` when empty or
    /// degenerate. Vertices lying on the cut line are kept exactly.
    pub fn clip_halfplane(&self, line: &Line) -> Option<ConvexPolygon> {
        let scale = self.scale();
        let eps = 1e-14 * scale;
        let dist: Vec<f64> = self
            .vertices
            .iter()
            .map(|&v| {
                let d = line.signed_distance(v);
                if d.abs() <= eps {
                    0.0
                } else {
                    d
                }
            })
            .collect();
        if dist.iter().all(|&d| d <= 0.0) {
            return Some(self.clone());
        }
        if dist.iter().all(|&d| d >= 0.0) {
            return None;
        }
        let n = self.vertices.len();
        let mut out: Vec<Vec2> = Vec::with_capacity(n + 2);
        for i in 0..n {
            let j = (i + 1) % n;
            let (a, b) = (self.vertices[i], self.vertices[j]);
            let (da, db) = (dist[i], dist[j]);
            if da <= 0.0 {
                out.push(a);
            }
            if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
                out.push(a + (b - a) * (da / (da - db)));
            }
        }
        let merge = MERGE_TOL * scale;
        let mut merged: Vec<Vec2> = Vec::with_capacity(out.len());
        for v in out {
            if merged.last().is_none_or(|&l: &Vec2| (v - l).norm() > merge) {
                merged.push(v);
            }
        }
        while merged.len() > 1 && (merged[0] - merged[merged.len() - 1]).norm() <= merge {
            merged.pop();
        }
        if merged.len() < 3 || shoelace(&merged) <= 1e-14 * scale * scale {
            return None;
        }
        Some(ConvexPolygon { vertices: merged })
    }

    /// Length of the chord `{x ∈ Ω : ⟨x, direction(angle)⟩ = t}`.
    pub fn section_profile(&self, angle: f64, t: f64) -> f64 {
        self.section_chord(angle, t).map_or(0.0, |(a, b)| (b - a).norm())
    }

    /// Endpoints of the chord `{x ∈ Ω : ⟨x, direction(angle)⟩ = t}`, ordered
    /// along the left normal of the direction.
    pub fn section_chord(&self, angle: f64, t: f64) -> Option<(Vec2, Vec2)> {
        let d = direction(angle);
        let perp = Vec2::new(-d.y, d.x);
        let base = d * t;
        let n = self.vertices.len();
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..n {
            let a = self.vertices[i];
            let e = self.vertices[(i + 1) % n] - a;
            // Inside the edge's half-plane: cross(e, base + s·perp − a) ≥ 0.
            let c0 = cross(e, base - a);
            let c1 = cross(e, perp);
            if c1.abs() <= 1e-15 * e.norm() {
                if c0 < 0.0 {
                    return None;
                }
            } else if c1 > 0.0 {
                lo = lo.max(-c0 / c1);
            } else {
                hi = hi.min(-c0 / c1);
            }
        }
        (hi >= lo).then(|| (base + perp * lo, base + perp * hi))
    }

    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        self.vertices.iter().map(|v| [v.x, v.y]).collect()
    }
}

impl Serialize for ConvexPolygon {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_pairs().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ConvexPolygon {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(deserializer)?;
        ConvexPolygon::from_pairs(&pairs).map_err(serde::de::Error::custom)
    }
}

/// Polygon inscribed in the Wulff shape `{H° < R}`: vertices
/// `R / H°(u_k) · u_k` for `m` equispaced unit vectors `u_k`.
///
/// The Wulff shape depends on `H` only through `H°`, which `H` shares with its
/// convex envelope, so non-convex gauges need no separate treatment.
pub fn wulff_shape(
    aniso: &Anisotropy,
    radius: f64,
    m: usize,
    grid: &DirectionGrid,
) -> Result<ConvexPolygon> {
    if m < 16 {
        return Err(Error::InvalidInput(format!(
            "Wulff polygon needs at least 16 vertices, got {m}"
        )));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "Wulff radius must be positive, got {radius}"
        )));
    }
    let vertices = (0..m)
        .map(|k| {
            let u = direction(TAU * k as f64 / m as f64);
            u * (radius / aniso.polar_unchecked(u, grid))
        })
        .collect();
    ConvexPolygon::new(vertices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, SQRT_2};

    fn tri() -> ConvexPolygon {
        ConvexPolygon::from_pairs(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap()
    }

    #[test]
    fn rejects_invalid_polygons() {
        assert!(ConvexPolygon::from_pairs(&[[0.0, 0.0], [1.0, 0.0]]).is_err());
        // clockwise
        assert!(ConvexPolygon::from_pairs(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_err());
        // non-convex
        assert!(ConvexPolygon::from_pairs(&[
            [0.0, 0.0],
            [2.0, 0.0],
            [1.0, 0.2],
            [2.0, 2.0],
            [0.0, 2.0]
        ])
        .is_err());
        // collinear
        assert!(ConvexPolygon::from_pairs(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).is_err());
        // pentagram winds twice
        let star: Vec<Vec2> = (0..5)
            .map(|k| direction(2.0 * TAU * k as f64 / 5.0))
            .collect();
        assert!(ConvexPolygon::new(star).is_err());
    }

    #[test]
    fn area_and_centroid() {
        let sq = ConvexPolygon::unit_square();
        assert_eq!(sq.area(), 1.0);
        assert!((sq.centroid() - Vec2::new(0.5, 0.5)).norm() < 1e-15);
        assert!((tri().centroid() - Vec2::new(1.0 / 3.0, 1.0 / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn euclidean_diameter_examples() {
        assert!((ConvexPolygon::unit_square().euclidean_diameter() - SQRT_2).abs() < 1e-15);
        let r = ConvexPolygon::rectangle(3.0, 0.01);
        assert!((r.euclidean_diameter() - (9.0f64 + 1e-4).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn clip_examples() {
        let sq = ConvexPolygon::unit_square();
        let half = sq
            .clip_halfplane(&Line::new(Vec2::new(0.5, 0.0), Vec2::new(1.0, 0.0)))
            .unwrap();
        assert!((half.area() - 0.5).abs() < 1e-15);
        let same = sq
            .clip_halfplane(&Line::new(Vec2::new(2.0, 0.0), Vec2::new(1.0, 0.0)))
            .unwrap();
        assert_eq!(same, sq);
        assert!(sq
            .clip_halfplane(&Line::new(Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0)))
            .is_none());
        // cut through two vertices keeps them once
        let diag = sq
            .clip_halfplane(&Line::new(Vec2::zeros(), Vec2::new(1.0, -1.0)))
            .unwrap();
        assert_eq!(diag.len(), 3);
        assert!((diag.area() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn section_profile_examples() {
        let sq = ConvexPolygon::unit_square();
        for t in [0.1, 0.5, 0.9] {
            assert!((sq.section_profile(0.0, t) - 1.0).abs() < 1e-14);
        }
        assert_eq!(sq.section_profile(0.0, 1.5), 0.0);
        for t in [0.1, 0.25, 0.8] {
            assert!((tri().section_profile(0.0, t) - (1.0 - t)).abs() < 1e-14);
        }
        // diagonal section of the square through its centre
        assert!((sq.section_profile(PI / 4.0, SQRT_2 / 2.0) - SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn anisotropic_diameter_examples() {
        let g = DirectionGrid::default();
        let sq = ConvexPolygon::unit_square();
        let e = Anisotropy::euclidean();
        assert!((sq.anisotropic_diameter(&e, &g).unwrap() - SQRT_2).abs() < 1e-6);
        let hs = Anisotropy::half_space_gauge(2.0).unwrap();
        let pair = sq.anisotropic_diameter_pair(&hs, &g).unwrap();
        assert!((pair.value - SQRT_2).abs() < 1e-6);
        let v = sq.vertices()[pair.to] - sq.vertices()[pair.from];
        assert!(v.x > 0.0, "attained along a rightward direction: {v:?}");
        let reversed = hs.polar(Vec2::new(-1.0, -1.0), &g).unwrap();
        assert!((reversed - 1.0).abs() < 1e-6);
    }

    #[test]
    fn antipodal_pairs_of_square() {
        let pairs = ConvexPolygon::unit_square().antipodal_pairs();
        assert!(pairs.contains(&(0, 2)));
        assert!(pairs.contains(&(1, 3)));
    }

    #[test]
    fn wulff_examples() {
        let g = DirectionGrid::default();
        let disk = wulff_shape(&Anisotropy::euclidean(), 1.0, 512, &g).unwrap();
        assert!((disk.area() - PI).abs() < 1e-3);
        let el = Anisotropy::ellipse(1.0, 2.0).unwrap();
        let w1 = wulff_shape(&el, 1.0, 512, &g).unwrap();
        assert!((w1.area() - 2.0 * PI).abs() < 1e-3);
        let w2 = wulff_shape(&el, 2.0, 512, &g).unwrap();
        assert!((w2.area() / w1.area() - 4.0).abs() < 4e-6);
        assert!((w1.euclidean_diameter() - 4.0).abs() < 1e-3);
        assert!(wulff_shape(&el, 1.0, 8, &g).is_err());
    }

    #[test]
    fn serde_as_pairs() {
        let sq = ConvexPolygon::unit_square();
        let s = serde_json::to_string(&sq).unwrap();
        assert_eq!(s, "[[0.0,0.0],[1.0,0.0],[1.0,1.0],[0.0,1.0]]");
        let back: ConvexPolygon = serde_json::from_str(&s).unwrap();
        assert_eq!(back, sq);
        assert!(serde_json::from_str::<ConvexPolygon>("[[0,0],[1,0]]").is_err());
    }
}
