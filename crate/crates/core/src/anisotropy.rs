//! Positively 1-homogeneous gauges on the plane and their polar functions.
//!
//! An [`Anisotropy`] is a member of a small gallery of gauges `H` that are
//! positive off the origin and lower semicontinuous. Every supremum over
//! `ξ ≠ 0` is reduced to the unit circle by homogeneity and computed on a
//! [`DirectionGrid`] followed by golden-section refinement of the best local
//! extrema. Discontinuous gauges are split into arcs on which `H` has a
//! continuous closure, and each arc is scanned separately.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::Vec2;

/// Default number of grid directions.
pub const DEFAULT_GRID_SIZE: usize = 4096;
/// Smallest admissible grid.
pub const MIN_GRID_SIZE: usize = 64;
/// Agreement tolerance between grid and closed-form polars at the default grid.
pub const POLAR_TOL: f64 = 1e-6;
/// Smoothing width used for the half-space gauge inside gradient-based solvers.
pub const DEFAULT_SMOOTHING: f64 = 1e-6;

const GOLDEN_ITERS: usize = 48;

/// Equispaced unit directions used to discretise suprema over the circle.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionGrid {
    angles: Vec<f64>,
    refinement_levels: usize,
}

impl DirectionGrid {
    /// `refinement_levels` is the number of best local extrema that receive a
    /// golden-section refinement after the grid scan.
    pub fn new(m: usize, refinement_levels: usize) -> Result<Self> {
        if m < MIN_GRID_SIZE {
            return Err(Error::Config(format!(
                "direction grid needs at least {MIN_GRID_SIZE} directions, got {m}"
            )));
        }
        let step = TAU / m as f64;
        let angles = (0..m).map(|k| k as f64 * step).collect();
        Ok(Self {
            angles,
            refinement_levels,
        })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn refinement_levels(&self) -> usize {
        self.refinement_levels
    }

    pub fn step(&self) -> f64 {
        TAU / self.angles.len() as f64
    }

    fn angle(&self, k: i64) -> f64 {
        k as f64 * self.step()
    }
}

impl Default for DirectionGrid {
    fn default() -> Self {
        Self::new(DEFAULT_GRID_SIZE, 3).expect("default grid is valid")
    }
}

/// Gallery of admissible gauges.
#[derive(Clone, Debug, PartialEq)]
pub enum AnisotropyKind {
    Euclidean,
    /// `H(x, y) = sqrt(a²x² + b²y²)`.
    Ellipse { a: f64, b: f64 },
    /// `H(ξ) = (|ξ₁|^q + |ξ₂|^q)^{1/q}`, `q ≥ 1`.
    LqNorm { q: f64 },
    /// `H(ξ) = |ξ|` when `ξ₁ ≥ 0` and `c·|ξ|` otherwise.
    HalfSpaceGauge { c: f64 },
    /// Values of `H` on `values.len()` equispaced unit directions, extended
    /// by homogeneity with nearest-angle lookup.
    CustomSampled { values: Arc<[f64]> },
}

impl AnisotropyKind {
    pub fn tag(&self) -> &'static str {
        match self {
            AnisotropyKind::Euclidean => "euclidean",
            AnisotropyKind::Ellipse { .. } => "ellipse",
            AnisotropyKind::LqNorm { .. } => "lq_norm",
            AnisotropyKind::HalfSpaceGauge { .. } => "half_space_gauge",
            AnisotropyKind::CustomSampled { .. } => "custom_sampled",
        }
    }
}

/// A gauge `ξ ↦ H(R_θ ξ)` where `H` is a gallery member and `R_θ` the
/// rotation by `rotation` radians.
#[derive(Clone, Debug, PartialEq)]
pub struct Anisotropy {
    kind: AnisotropyKind,
    rotation: f64,
    is_convex: bool,
    is_even: bool,
}

/// An angular interval on which the gauge (or its closure) is continuous.
#[derive(Clone, Copy, Debug)]
struct AngleArc {
    start: f64,
    len: f64,
    /// `Some(s)` when `H = s·|ξ|` on the closed arc.
    radial_scale: Option<f64>,
}

impl AngleArc {
    fn full() -> Self {
        Self {
            start: 0.0,
            len: TAU,
            radial_scale: None,
        }
    }

    fn is_full(&self) -> bool {
        self.len >= TAU
    }
}

fn dir(angle: f64) -> Vec2 {
    Vec2::new(angle.cos(), angle.sin())
}

fn rotate_vec(v: Vec2, angle: f64) -> Vec2 {
    let (s, c) = angle.sin_cos();
    Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

fn check_finite(v: Vec2, what: &str) -> Result<()> {
    if v.x.is_finite() && v.y.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} has non-finite components")))
    }
}

impl Anisotropy {
    pub fn euclidean() -> Self {
        Self {
            kind: AnisotropyKind::Euclidean,
            rotation: 0.0,
            is_convex: true,
            is_even: true,
        }
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "ellipse needs positive finite semi-axes, got a={a}, b={b}"
            )));
        }
        Ok(Self {
            kind: AnisotropyKind::Ellipse { a, b },
            rotation: 0.0,
            is_convex: true,
            is_even: true,
        })
    }

    pub fn lq_norm(q: f64) -> Result<Self> {
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "lq_norm needs finite q >= 1, got {q}"
            )));
        }
        Ok(Self {
            kind: AnisotropyKind::LqNorm { q },
            rotation: 0.0,
            is_convex: true,
            is_even: true,
        })
    }

    pub fn half_space_gauge(c: f64) -> Result<Self> {
        if !(c > 1.0 && c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "half_space_gauge needs finite c > 1, got {c}"
            )));
        }
        Ok(Self {
            kind: AnisotropyKind::HalfSpaceGauge { c },
            rotation: 0.0,
            is_convex: false,
            is_even: false,
        })
    }

    /// `values[k]` is `H` at angle `2πk/m`.
    pub fn custom_sampled(values: Vec<f64>) -> Result<Self> {
        if values.len() < MIN_GRID_SIZE {
            return Err(Error::InvalidInput(format!(
                "custom_sampled needs at least {MIN_GRID_SIZE} samples, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "custom_sampled values must be positive and finite, found {bad}"
            )));
        }
        let m = values.len();
        let is_even = m % 2 == 0 && (0..m / 2).all(|k| values[k] == values[k + m / 2]);
        Ok(Self {
            kind: AnisotropyKind::CustomSampled {
                values: values.into(),
            },
            rotation: 0.0,
            is_convex: false,
            is_even,
        })
    }

    /// Samples `gauge` on `m` equispaced unit directions.
    pub fn custom_from_fn(m: usize, gauge: impl Fn(Vec2) -> f64) -> Result<Self> {
        let step = TAU / m as f64;
        Self::custom_sampled((0..m).map(|k| gauge(dir(k as f64 * step))).collect())
    }

    pub fn kind(&self) -> &AnisotropyKind {
        &self.kind
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    pub fn is_convex(&self) -> bool {
        self.is_convex
    }

    pub fn is_even(&self) -> bool {
        self.is_even
    }

    /// `ξ ↦ H(Aξ)` with `A` the counterclockwise rotation by `angle`.
    pub fn rotate(&self, angle: f64) -> Self {
        Self {
            rotation: (self.rotation + angle).rem_euclid(TAU),
            ..self.clone()
        }
    }

    /// `H(ξ)`; zero exactly at the origin.
    pub fn evaluate(&self, xi: Vec2) -> Result<f64> {
        check_finite(xi, "argument")?;
        Ok(self.value(xi))
    }

    pub(crate) fn value(&self, xi: Vec2) -> f64 {
        base_value(&self.kind, rotate_vec(xi, self.rotation))
    }

    /// `H` and its gradient at `xi`, with the half-space gauge replaced by a
    /// smoothed step of width `smoothing` across `ξ₁ = 0`. The gradient at the
    /// origin is reported as zero.
    pub fn value_and_gradient(&self, xi: Vec2, smoothing: f64) -> (f64, Vec2) {
        let y = rotate_vec(xi, self.rotation);
        let (h, g) = base_value_and_gradient(&self.kind, y, smoothing);
        (h, rotate_vec(g, -self.rotation))
    }

    fn arcs(&self) -> Vec<AngleArc> {
        match self.kind {
            AnisotropyKind::HalfSpaceGauge { c } => {
                // Base-frame arcs [-π/2, π/2] (scale 1) and [π/2, 3π/2] (scale c),
                // pulled back through the rotation.
                let right = -FRAC_PI_2 - self.rotation;
                vec![
                    AngleArc {
                        start: right,
                        len: PI,
                        radial_scale: Some(1.0),
                    },
                    AngleArc {
                        start: right + PI,
                        len: PI,
                        radial_scale: Some(c),
                    },
                ]
            }
            _ => vec![AngleArc::full()],
        }
    }

    /// `H` at the unit direction of angle `phi`, using the closure value on `arc`.
    fn arc_value(&self, arc: &AngleArc, phi: f64) -> f64 {
        match arc.radial_scale {
            Some(s) => s,
            None => self.value(dir(phi)),
        }
    }

    /// Polar function `H°(η) = sup_{ξ≠0} ⟨ξ,η⟩ / H(ξ)`, computed on `grid`.
    pub fn polar(&self, eta: Vec2, grid: &DirectionGrid) -> Result<f64> {
        check_finite(eta, "polar argument")?;
        Ok(self.polar_unchecked(eta, grid))
    }

    pub(crate) fn polar_unchecked(&self, eta: Vec2, grid: &DirectionGrid) -> f64 {
        if eta.x == 0.0 && eta.y == 0.0 {
            return 0.0;
        }
        let mut best = 0.0f64;
        for arc in self.arcs() {
            let f = |phi: f64| dir(phi).dot(&eta) / self.arc_value(&arc, phi);
            let scan = |k: i64| {
                let phi = grid.angle(k);
                f(phi)
            };
            best = best.max(arc_extremum(&arc, grid, &scan, &f, Extremum::Max).0);
        }
        best
    }

    /// Closed-form polar where the gallery provides one.
    pub fn polar_closed_form(&self, eta: Vec2) -> Option<f64> {
        let e = rotate_vec(eta, self.rotation);
        match self.kind {
            AnisotropyKind::Euclidean => Some(e.norm()),
            AnisotropyKind::Ellipse { a, b } => Some((e.x / a).hypot(e.y / b)),
            AnisotropyKind::LqNorm { q } => {
                if q == 1.0 {
                    Some(e.x.abs().max(e.y.abs()))
                } else {
                    Some(lq(e, q / (q - 1.0)))
                }
            }
            AnisotropyKind::HalfSpaceGauge { c } => {
                // Support function of the closed unit ball: right unit half-disk
                // together with the left half-disk of radius 1/c.
                if e.x >= 0.0 {
                    Some(e.norm())
                } else {
                    Some(e.y.abs().max(e.norm() / c))
                }
            }
            AnisotropyKind::CustomSampled { .. } => None,
        }
    }

    /// Largest `a` with `a|ξ| ≤ H(ξ)`, i.e. the minimum of `H` on the unit circle.
    pub fn coercivity_constant(&self, grid: &DirectionGrid) -> Result<f64> {
        let mut best = f64::INFINITY;
        for arc in self.arcs() {
            let f = |phi: f64| self.arc_value(&arc, phi);
            let scan = |k: i64| f(grid.angle(k));
            best = best.min(arc_extremum(&arc, grid, &scan, &f, Extremum::Min).0);
        }
        if best > 0.0 && best.is_finite() {
            Ok(best)
        } else {
            Err(Error::InvariantViolation(format!(
                "gauge minimum on the unit circle is {best}; not a positive gauge"
            )))
        }
    }

    /// `max_{|ν|=1} H°(ν)`. Swapping the two suprema shows this equals
    /// `1 / min_{|ξ|=1} H(ξ)`.
    pub fn max_polar_on_circle(&self, grid: &DirectionGrid) -> Result<f64> {
        Ok(1.0 / self.coercivity_constant(grid)?)
    }

    /// Bipolar `(H°)°(ξ)`; builds a fresh polar table on each call. Use
    /// [`BipolarEvaluator`] to amortise the table across many points.
    pub fn bipolar(&self, xi: Vec2, grid: &DirectionGrid) -> Result<f64> {
        check_finite(xi, "bipolar argument")?;
        Ok(BipolarEvaluator::new(self, grid).value(xi))
    }

    /// Parameters in the config/JSON shape `{"kind": ..., "params": {...}}`.
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        let params = match &self.kind {
            AnisotropyKind::Euclidean => json!({}),
            AnisotropyKind::Ellipse { a, b } => json!({ "a": a, "b": b }),
            AnisotropyKind::LqNorm { q } => json!({ "q": q }),
            AnisotropyKind::HalfSpaceGauge { c } => json!({ "c": c }),
            AnisotropyKind::CustomSampled { values } => json!({ "values": &values[..] }),
        };
        let mut obj = json!({ "kind": self.kind.tag(), "params": params });
        if self.rotation != 0.0 {
            obj["params"]["rotation"] = json!(self.rotation);
        }
        obj
    }
}

fn lq(v: Vec2, q: f64) -> f64 {
    let (x, y) = (v.x.abs(), v.y.abs());
    let m = x.max(y);
    if m == 0.0 {
        return 0.0;
    }
    m * ((x / m).powf(q) + (y / m).powf(q)).powf(1.0 / q)
}

fn base_value(kind: &AnisotropyKind, y: Vec2) -> f64 {
    match kind {
        AnisotropyKind::Euclidean => y.norm(),
        AnisotropyKind::Ellipse { a, b } => (a * y.x).hypot(b * y.y),
        AnisotropyKind::LqNorm { q } => lq(y, *q),
        AnisotropyKind::HalfSpaceGauge { c } => {
            if y.x >= 0.0 {
                y.norm()
            } else {
                c * y.norm()
            }
        }
        AnisotropyKind::CustomSampled { values } => {
            let r = y.norm();
            if r == 0.0 {
                return 0.0;
            }
            let m = values.len();
            let theta = y.y.atan2(y.x).rem_euclid(TAU);
            let k = (theta / TAU * m as f64).round() as usize % m;
            r * values[k]
        }
    }
}

fn base_value_and_gradient(kind: &AnisotropyKind, y: Vec2, smoothing: f64) -> (f64, Vec2) {
    let r = y.norm();
    if r == 0.0 {
        return (0.0, Vec2::zeros());
    }
    match kind {
        AnisotropyKind::Euclidean => (r, y / r),
        AnisotropyKind::Ellipse { a, b } => {
            let h = (a * y.x).hypot(b * y.y);
            (h, Vec2::new(a * a * y.x, b * b * y.y) / h)
        }
        AnisotropyKind::LqNorm { q } => {
            let h = lq(y, *q);
            let comp = |t: f64| t.signum() * (t.abs() / h).powf(q - 1.0);
            let gx = if y.x == 0.0 { 0.0 } else { comp(y.x) };
            let gy = if y.y == 0.0 { 0.0 } else { comp(y.y) };
            (h, Vec2::new(gx, gy))
        }
        AnisotropyKind::HalfSpaceGauge { c } => {
            // H_δ = r·(1 + (c-1)·S(z)), z = -y₁/r, with S a C¹ step rising from
            // 0 at z = -δ to 1 at z = 0, so that H_δ ≥ H. δ = 0 is the exact gauge.
            let z = -y.x / r;
            let (s, ds) = if smoothing <= 0.0 {
                (if z > 0.0 { 1.0 } else { 0.0 }, 0.0)
            } else if z >= 0.0 {
                (1.0, 0.0)
            } else if z <= -smoothing {
                (0.0, 0.0)
            } else {
                let w = 1.0 + z / smoothing;
                (w * w * (3.0 - 2.0 * w), 6.0 * w * (1.0 - w) / smoothing)
            };
            let scale = 1.0 + (c - 1.0) * s;
            let dz = Vec2::new(-1.0 / r, 0.0) + y * (y.x / (r * r * r));
            (r * scale, y / r * scale + dz * (r * (c - 1.0) * ds))
        }
        AnisotropyKind::CustomSampled { .. } => {
            let h = base_value(kind, y);
            let step = 1e-7 * r;
            let gx = (base_value(kind, y + Vec2::new(step, 0.0))
                - base_value(kind, y - Vec2::new(step, 0.0)))
                / (2.0 * step);
            let gy = (base_value(kind, y + Vec2::new(0.0, step))
                - base_value(kind, y - Vec2::new(0.0, step)))
                / (2.0 * step);
            (h, Vec2::new(gx, gy))
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Extremum {
    Max,
    Min,
}

/// Extremum of `f` over `arc`: scan the grid angles in the arc (and its
/// endpoints) with `scan`, then golden-section refine around the best
/// `grid.refinement_levels()` local extrema. Returns `(value, angle)`.
fn arc_extremum(
    arc: &AngleArc,
    grid: &DirectionGrid,
    scan: &dyn Fn(i64) -> f64,
    f: &dyn Fn(f64) -> f64,
    kind: Extremum,
) -> (f64, f64) {
    let sign = if kind == Extremum::Max { 1.0 } else { -1.0 };
    let step = grid.step();
    // Samples as (angle, signed value); scanned values use the grid index so
    // callers can serve them from a cache.
    let mut samples: Vec<(f64, f64)> = Vec::new();
    if arc.is_full() {
        let m = grid.len() as i64;
        samples.extend((0..m).map(|k| (grid.angle(k), sign * scan(k))));
    } else {
        let end = arc.start + arc.len;
        samples.push((arc.start, sign * f(arc.start)));
        let k0 = (arc.start / step).floor() as i64 + 1;
        let k1 = (end / step).ceil() as i64 - 1;
        for k in k0..=k1 {
            let phi = grid.angle(k);
            if phi > arc.start && phi < end {
                samples.push((phi, sign * scan(k)));
            }
        }
        samples.push((end, sign * f(end)));
    }
    let n = samples.len();
    let periodic = arc.is_full();
    let neighbour = |i: usize, forward: bool| -> Option<usize> {
        match (forward, periodic) {
            (true, true) => Some((i + 1) % n),
            (false, true) => Some((i + n - 1) % n),
            (true, false) => (i + 1 < n).then_some(i + 1),
            (false, false) => i.checked_sub(1),
        }
    };
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&i| {
            let v = samples[i].1;
            let l = neighbour(i, false).map_or(f64::NEG_INFINITY, |j| samples[j].1);
            let r = neighbour(i, true).map_or(f64::NEG_INFINITY, |j| samples[j].1);
            v >= l && v >= r
        })
        .collect();
    peaks.sort_by(|&i, &j| samples[j].1.total_cmp(&samples[i].1));

    let (mut best_angle, mut best) = samples
        .iter()
        .copied()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("arc has samples");
    let signed = |phi: f64| sign * f(phi);
    for &i in peaks.iter().take(grid.refinement_levels().max(1)) {
        let centre = samples[i].0;
        let (mut lo, mut hi) = (centre - step, centre + step);
        if !periodic {
            lo = lo.max(arc.start);
            hi = hi.min(arc.start + arc.len);
        }
        let (phi, v) = golden_max(&signed, lo, hi);
        if v > best {
            best = v;
            best_angle = phi;
        }
    }
    (sign * best, best_angle)
}

fn golden_max(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..GOLDEN_ITERS {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Evaluates `(H°)°` with the inner polar cached on the grid directions.
///
/// The bipolar is the gauge of the convex hull of `{H ≤ 1}`, i.e. the convex
/// envelope of `H`.
pub struct BipolarEvaluator<'a> {
    aniso: &'a Anisotropy,
    grid: &'a DirectionGrid,
    polar_table: Vec<f64>,
}

impl<'a> BipolarEvaluator<'a> {
    pub fn new(aniso: &'a Anisotropy, grid: &'a DirectionGrid) -> Self {
        let polar_table = grid
            .angles()
            .iter()
            .map(|&phi| aniso.polar_unchecked(dir(phi), grid))
            .collect();
        Self {
            aniso,
            grid,
            polar_table,
        }
    }

    /// Cached `H°` on the grid directions.
    pub fn polar_table(&self) -> &[f64] {
        &self.polar_table
    }

    pub fn value(&self, xi: Vec2) -> f64 {
        if xi.x == 0.0 && xi.y == 0.0 {
            return 0.0;
        }
        let m = self.grid.len() as i64;
        let scan = |k: i64| {
            let idx = k.rem_euclid(m) as usize;
            dir(self.grid.angle(k)).dot(&xi) / self.polar_table[idx]
        };
        let f = |phi: f64| {
            let d = dir(phi);
            d.dot(&xi) / self.aniso.polar_unchecked(d, self.grid)
        };
        arc_extremum(&AngleArc::full(), self.grid, &scan, &f, Extremum::Max)
            .0
            .max(0.0)
    }
}

/// A generic continuous gauge given by a closure, used to take polars of
/// derived functions such as a bipolar.
pub fn polar_of_gauge(gauge: &dyn Fn(Vec2) -> f64, eta: Vec2, grid: &DirectionGrid) -> f64 {
    let f = |phi: f64| {
        let d = dir(phi);
        d.dot(&eta) / gauge(d)
    };
    let scan = |k: i64| f(grid.angle(k));
    arc_extremum(&AngleArc::full(), grid, &scan, &f, Extremum::Max)
        .0
        .max(0.0)
}

/// Like [`polar_of_gauge`] but with the scan served from `table`, the gauge
/// values on the grid directions.
pub fn polar_of_tabulated_gauge(
    table: &[f64],
    gauge: &dyn Fn(Vec2) -> f64,
    eta: Vec2,
    grid: &DirectionGrid,
) -> f64 {
    let m = grid.len() as i64;
    let scan = |k: i64| dir(grid.angle(k)).dot(&eta) / table[k.rem_euclid(m) as usize];
    let f = |phi: f64| {
        let d = dir(phi);
        d.dot(&eta) / gauge(d)
    };
    arc_extremum(&AngleArc::full(), grid, &scan, &f, Extremum::Max)
        .0
        .max(0.0)
}
