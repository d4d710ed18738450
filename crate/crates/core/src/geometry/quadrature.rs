//! Symmetric triangle quadrature on fan triangulations of convex polygons.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geometry::polygon::ConvexPolygon;
use crate::Vec2;

/// Polynomial degree a rule integrates exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureOrder {
    Degree1,
    Degree2,
    Degree4,
    Degree5,
}

type Rule = &'static [([f64; 3], f64)];

const CENTROID: Rule = &[([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 1.0)];

const STRANG_FIX_3: Rule = &[
    ([2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], 1.0 / 3.0),
];

// Dunavant degree-4, 6 points.
const A4: f64 = 0.445_948_490_915_965;
const B4: f64 = 0.091_576_213_509_771;
const W4A: f64 = 0.223_381_589_678_011;
const W4B: f64 = 0.109_951_743_655_322;
const DUNAVANT_4: Rule = &[
    ([1.0 - 2.0 * A4, A4, A4], W4A),
    ([A4, 1.0 - 2.0 * A4, A4], W4A),
    ([A4, A4, 1.0 - 2.0 * A4], W4A),
    ([1.0 - 2.0 * B4, B4, B4], W4B),
    ([B4, 1.0 - 2.0 * B4, B4], W4B),
    ([B4, B4, 1.0 - 2.0 * B4], W4B),
];

// Radon degree-5, 7 points: α = (6 ∓ √15)/21, w = (155 ∓ √15)/1200.
const A5: f64 = 0.101_286_507_323_456_34;
const B5: f64 = 0.470_142_064_105_115_1;
const W5A: f64 = 0.125_939_180_544_827_15;
const W5B: f64 = 0.132_394_152_788_506_18;
const RADON_5: Rule = &[
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
    ([1.0 - 2.0 * A5, A5, A5], W5A),
    ([A5, 1.0 - 2.0 * A5, A5], W5A),
    ([A5, A5, 1.0 - 2.0 * A5], W5A),
    ([1.0 - 2.0 * B5, B5, B5], W5B),
    ([B5, 1.0 - 2.0 * B5, B5], W5B),
    ([B5, B5, 1.0 - 2.0 * B5], W5B),
];

impl QuadratureOrder {
    /// Smallest supported rule exact for polynomials of degree `degree`.
    pub fn from_degree(degree: u32) -> Result<Self> {
        match degree {
            1 => Ok(Self::Degree1),
            2 => Ok(Self::Degree2),
            3 | 4 => Ok(Self::Degree4),
            5 => Ok(Self::Degree5),
            _ => Err(Error::Config(format!(
                "quadrature degree {degree} unsupported (use 1..=5)"
            ))),
        }
    }

    fn rule(self) -> Rule {
        match self {
            Self::Degree1 => CENTROID,
            Self::Degree2 => STRANG_FIX_3,
            Self::Degree4 => DUNAVANT_4,
            Self::Degree5 => RADON_5,
        }
    }
}

/// `∫_T f` over the triangle `(a, b, c)` (either orientation).
pub fn integrate_triangle(
    a: Vec2,
    b: Vec2,
    c: Vec2,
    f: &dyn Fn(Vec2) -> f64,
    order: QuadratureOrder,
) -> f64 {
    let area = 0.5 * ((b - a).perp(&(c - a))).abs();
    area * order
        .rule()
        .iter()
        .map(|(l, w)| w * f(a * l[0] + b * l[1] + c * l[2]))
        .sum::<f64>()
}

/// `∫_Ω f`: fan triangulation from the vertex mean, one rule per fan triangle.
pub fn integrate(poly: &ConvexPolygon, f: &dyn Fn(Vec2) -> f64, degree: u32) -> Result<f64> {
    Ok(integrate_with(poly, f, QuadratureOrder::from_degree(degree)?, 0))
}

/// As [`integrate`], with each fan triangle split `4^levels` times by midpoints.
pub fn integrate_with(
    poly: &ConvexPolygon,
    f: &dyn Fn(Vec2) -> f64,
    order: QuadratureOrder,
    levels: u32,
) -> f64 {
    let c = poly.vertex_mean();
    let v = poly.vertices();
    let n = v.len();
    (0..n)
        .map(|i| subdivided(c, v[i], v[(i + 1) % n], f, order, levels))
        .sum()
}

fn subdivided(
    a: Vec2,
    b: Vec2,
    c: Vec2,
    f: &dyn Fn(Vec2) -> f64,
    order: QuadratureOrder,
    levels: u32,
) -> f64 {
    if levels == 0 {
        return integrate_triangle(a, b, c, f, order);
    }
    let (ab, bc, ca) = ((a + b) / 2.0, (b + c) / 2.0, (c + a) / 2.0);
    subdivided(a, ab, ca, f, order, levels - 1)
        + subdivided(ab, b, bc, f, order, levels - 1)
        + subdivided(ca, bc, c, f, order, levels - 1)
        + subdivided(ab, bc, ca, f, order, levels - 1)
}

/// A triangle of the adaptive refinement with its two estimates: `fine` from
/// the four midpoint children, `err = |coarse − fine|`.
struct Cell {
    tri: [Vec2; 3],
    fine: f64,
    abs: f64,
    err: f64,
}

impl Cell {
    fn new(tri: [Vec2; 3], f: &dyn Fn(Vec2) -> f64, order: QuadratureOrder) -> Self {
        let [a, b, c] = tri;
        let coarse = integrate_triangle(a, b, c, f, order);
        let (mut fine, mut abs) = (0.0, 0.0);
        for [p, q, r] in children(tri) {
            let area = 0.5 * ((q - p).perp(&(r - p))).abs();
            for (l, w) in order.rule() {
                let v = f(p * l[0] + q * l[1] + r * l[2]);
                fine += area * w * v;
                abs += area * w * v.abs();
            }
        }
        Self { tri, fine, abs, err: (coarse - fine).abs() }
    }
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn children([a, b, c]: [Vec2; 3]) -> [[Vec2; 3]; 4] {
    let (ab, bc, ca) = ((a + b) / 2.0, (b + c) / 2.0, (c + a) / 2.0);
    [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
}

/// Adaptive midpoint refinement of the fan triangulation of `poly`: every fan
/// triangle is first split `4^min_levels` times, then the cell with the
/// largest error estimate is split until the summed estimate drops below
/// `rel_tol · ∫|f|` or `max_refinements` cells have been split. Returns the
/// leaf cells with their integrals. Meant for integrands with kinks, where
/// uniform refinement converges slowly.
pub fn adaptive_cells(
    poly: &ConvexPolygon,
    f: &dyn Fn(Vec2) -> f64,
    order: QuadratureOrder,
    min_levels: u32,
    rel_tol: f64,
    max_refinements: usize,
) -> Vec<([Vec2; 3], f64)> {
    let c = poly.vertex_mean();
    let v = poly.vertices();
    let n = v.len();
    let mut start: Vec<[Vec2; 3]> = (0..n).map(|i| [c, v[i], v[(i + 1) % n]]).collect();
    for _ in 0..min_levels {
        start = start.into_iter().flat_map(children).collect();
    }
    let mut heap: BinaryHeap<Cell> = start.into_iter().map(|t| Cell::new(t, f, order)).collect();
    let (mut abs, mut err) = heap.iter().fold((0.0, 0.0), |(a, e), cell| (a + cell.abs, e + cell.err));
    for _ in 0..max_refinements {
        if err <= rel_tol * abs {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        abs -= worst.abs;
        err -= worst.err;
        for t in children(worst.tri) {
            let cell = Cell::new(t, f, order);
            abs += cell.abs;
            err += cell.err;
            heap.push(cell);
        }
    }
    heap.into_iter().map(|cell| (cell.tri, cell.fine)).collect()
}

/// `∫_Ω f` over the cells of [`adaptive_cells`].
pub fn integrate_adaptive(
    poly: &ConvexPolygon,
    f: &dyn Fn(Vec2) -> f64,
    order: QuadratureOrder,
    min_levels: u32,
    rel_tol: f64,
    max_refinements: usize,
) -> f64 {
    adaptive_cells(poly, f, order, min_levels, rel_tol, max_refinements)
        .iter()
        .map(|c| c.1)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> ConvexPolygon {
        ConvexPolygon::from_pairs(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap()
    }

    /// ∫_{unit triangle} x^i y^j = i! j! / (i + j + 2)!
    fn monomial_exact(i: u32, j: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        fact(i) * fact(j) / fact(i + j + 2)
    }

    #[test]
    fn rules_are_exact_to_their_degree() {
        for (order, deg) in [
            (QuadratureOrder::Degree1, 1),
            (QuadratureOrder::Degree2, 2),
            (QuadratureOrder::Degree4, 4),
            (QuadratureOrder::Degree5, 5),
        ] {
            let w: f64 = order.rule().iter().map(|r| r.1).sum();
            assert!((w - 1.0).abs() < 1e-14);
            for i in 0..=deg {
                for j in 0..=(deg - i) {
                    let f = move |p: Vec2| p.x.powi(i as i32) * p.y.powi(j as i32);
                    let got = integrate_triangle(
                        Vec2::zeros(),
                        Vec2::new(1.0, 0.0),
                        Vec2::new(0.0, 1.0),
                        &f,
                        order,
                    );
                    assert!(
                        (got - monomial_exact(i, j)).abs() < 1e-14,
                        "{order:?} x^{i} y^{j}: {got}"
                    );
                }
            }
        }
    }

    #[test]
    fn adaptive_handles_a_kink() {
        let sq = ConvexPolygon::unit_square();
        // ∫ |x − 1/3|^{1/2} sign(x − 1/3) dx = (2/3)((2/3)^{3/2} − (1/3)^{3/2}).
        let f = |p: Vec2| {
            let s = p.x - 1.0 / 3.0;
            s.signum() * s.abs().sqrt()
        };
        let exact = 2.0 / 3.0 * ((2.0f64 / 3.0).powf(1.5) - (1.0f64 / 3.0).powf(1.5));
        let uniform = integrate_with(&sq, &f, QuadratureOrder::Degree5, 3);
        let adaptive = integrate_adaptive(&sq, &f, QuadratureOrder::Degree5, 3, 1e-12, 20_000);
        assert!((adaptive - exact).abs() < 1e-9, "{adaptive} vs {exact}");
        assert!((adaptive - exact).abs() < 1e-2 * (uniform - exact).abs());
        // Smooth integrands stop at the minimum level.
        let cells = adaptive_cells(&sq, &|p| p.x * p.y, QuadratureOrder::Degree5, 1, 1e-12, 100);
        assert_eq!(cells.len(), 4 * 4);
    }

    #[test]
    fn examples() {
        let sq = ConvexPolygon::unit_square();
        assert!((integrate(&sq, &|_| 1.0, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((integrate(&sq, &|p| p.x, 2).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(integrate(&sq, &|_| 1.0, 0), Err(Error::Config(_))));
        assert!(matches!(integrate(&sq, &|_| 1.0, 7), Err(Error::Config(_))));
        assert!((integrate(&tri(), &|p| p.x * p.y, 4).unwrap() - monomial_exact(1, 1)).abs() < 1e-15);
    }
}
