use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::pi_p::pi_p_closed;
use crate::error::{Error, Result};
use crate::geometry::polygon::ConvexPolygon;
use crate::geometry::weight::Weight;
use crate::optimize::{minimize, weighted_p_shift, DescentSettings, ShiftInvariantQuotient};

/// Equispaced nodes `0 = t₀ < … < t_{n−1} = L`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid1D {
    length: f64,
    n: usize,
}

impl Grid1D {
    pub const MIN_NODES: usize = 16;

    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidInput(format!("segment length must be positive, got {length}")));
        }
        if n < Self::MIN_NODES {
            return Err(Error::InvalidInput(format!(
                "need at least {} nodes, got {n}",
                Self::MIN_NODES
            )));
        }
        Ok(Self { length, n })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.length
        } else {
            self.length * i as f64 / (self.n - 1) as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Trapezoid weight of node `i`.
    fn trapezoid(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n {
            0.5 * self.spacing()
        } else {
            self.spacing()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Profile1D {
    pub grid: Grid1D,
    pub values: Vec<f64>,
}

impl Profile1D {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "profile has {} values on a {}-node grid",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("profile values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().into_iter().map(f).collect();
        Self::new(grid, values)
    }

    /// `t,u` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,u\n");
        for (i, u) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", self.grid.node(i), u));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight1DKind {
    Constant { value: f64 },
    /// `exp(c·t)`.
    ExpLinear { c: f64 },
    /// `exp(−c·(t − center)²)`.
    Gaussian { c: f64, center: f64 },
    /// Mass of a planar weight on the sections of a convex polygon.
    SectionInduced,
}

/// Positive, log-concave nodal weight on a [`Grid1D`].
#[derive(Clone, Debug, PartialEq)]
pub struct Weight1D {
    kind: Weight1DKind,
    grid: Grid1D,
    values: Vec<f64>,
}

// Five-point Gauss–Legendre on [-1, 1].
const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

impl Weight1D {
    pub fn from_kind(grid: Grid1D, kind: Weight1DKind) -> Result<Self> {
        let values = match &kind {
            Weight1DKind::Constant { value } => vec![*value; grid.len()],
            Weight1DKind::ExpLinear { c } => grid.nodes().iter().map(|t| (c * t).exp()).collect(),
            Weight1DKind::Gaussian { c, center } => {
                if !(*c > 0.0) {
                    return Err(Error::InvalidInput(format!("gaussian weight needs c > 0, got {c}")));
                }
                grid.nodes().iter().map(|t| (-c * (t - center).powi(2)).exp()).collect()
            }
            Weight1DKind::SectionInduced => {
                return Err(Error::InvalidInput(
                    "section-induced weights are built with Weight1D::section_induced".into(),
                ))
            }
        };
        Self::checked(kind, grid, values)
    }

    pub fn constant(grid: Grid1D, value: f64) -> Result<Self> {
        Self::from_kind(grid, Weight1DKind::Constant { value })
    }

    pub fn exp_linear(grid: Grid1D, c: f64) -> Result<Self> {
        Self::from_kind(grid, Weight1DKind::ExpLinear { c })
    }

    pub fn gaussian(grid: Grid1D, c: f64, center: f64) -> Result<Self> {
        Self::from_kind(grid, Weight1DKind::Gaussian { c, center })
    }

    /// `f(t) = ∫ ω` over the chord of `poly` at height `t` along
    /// `direction(angle)`, with `t` shifted so the support starts at 0.
    /// Chords of zero length at the ends are floored at `1e-12·max f`.
    pub fn section_induced(poly: &ConvexPolygon, weight: &Weight, angle: f64, n: usize) -> Result<Self> {
        let (lo, hi) = poly.support_interval(angle);
        let grid = Grid1D::new(hi - lo, n)?;
        let mut values: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|t| match poly.section_chord(angle, lo + t) {
                Some((a, b)) => {
                    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
                    half.norm() * GL5.iter().map(|(x, w)| w * weight.eval(mid + half * *x)).sum::<f64>()
                }
                None => 0.0,
            })
            .collect();
        let floor = 1e-12 * values.iter().cloned().fold(0.0, f64::max);
        values.iter_mut().for_each(|v| *v = v.max(floor));
        Self::checked(Weight1DKind::SectionInduced, grid, values)
    }

    fn checked(kind: Weight1DKind, grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput("weight length does not match grid".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput(format!("weight must be positive and finite, found {v}")));
        }
        let w = Self { kind, grid, values };
        if w.log_concavity_gap() < 0.0 {
            return Err(Error::InvalidInput("weight is not log-concave on the grid".into()));
        }
        Ok(w)
    }

    /// `min_i log f_i − (log f_{i−1} + log f_{i+1})/2`, relaxed by 1e-9.
    pub fn log_concavity_gap(&self) -> f64 {
        self.values
            .windows(3)
            .map(|w| w[1].ln() - 0.5 * (w[0].ln() + w[2].ln()) + 1e-9)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn kind(&self) -> &Weight1DKind {
        &self.kind
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Discrete 1-D quotient: cell differences weighted by the cell-mean of `f`
/// in the numerator, trapezoid rule in the denominator.
struct Quotient1D {
    p: f64,
    /// Trapezoid weight times `f` per node.
    mass: Vec<f64>,
    /// `(f_i + f_{i+1})/2 · Δ^{1−p}` per cell.
    stiffness: Vec<f64>,
}

impl Quotient1D {
    fn new(f: &Weight1D, p: f64) -> Self {
        let g = &f.grid;
        let dx = g.spacing();
        let mass = (0..g.len()).map(|i| g.trapezoid(i) * f.values[i]).collect();
        let stiffness = f
            .values
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]) * dx.powf(1.0 - p))
            .collect();
        Self { p, mass, stiffness }
    }

}

impl ShiftInvariantQuotient for Quotient1D {
    fn dim(&self) -> usize {
        self.mass.len()
    }

    fn degree(&self) -> f64 {
        self.p
    }

    fn shift(&self, u: &[f64]) -> f64 {
        weighted_p_shift(u, &self.mass, self.p)
    }

    fn numerator(&self, u: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let p = self.p;
        let mut total = 0.0;
        match grad {
            Some(g) => {
                g.iter_mut().for_each(|v| *v = 0.0);
                for (i, k) in self.stiffness.iter().enumerate() {
                    let d = u[i + 1] - u[i];
                    let a = d.abs().powf(p - 1.0);
                    total += k * a * d.abs();
                    let dg = k * p * a.copysign(d);
                    g[i] -= dg;
                    g[i + 1] += dg;
                }
            }
            None => {
                for (i, k) in self.stiffness.iter().enumerate() {
                    total += k * (u[i + 1] - u[i]).abs().powf(p);
                }
            }
        }
        total
    }

    fn denominator(&self, w: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let p = self.p;
        let mut total = 0.0;
        match grad {
            Some(g) => {
                for ((gi, m), x) in g.iter_mut().zip(&self.mass).zip(w) {
                    let a = x.abs().powf(p - 1.0);
                    total += m * a * x.abs();
                    *gi = m * p * a.copysign(*x);
                }
            }
            None => {
                for (m, x) in self.mass.iter().zip(w) {
                    total += m * x.abs().powf(p);
                }
            }
        }
        total
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("exponent must satisfy 1 < p < ∞, got {p}")))
    }
}

fn check_grids(u: &Profile1D, f: &Weight1D) -> Result<()> {
    if u.grid != f.grid {
        return Err(Error::InvalidInput("profile and weight live on different grids".into()));
    }
    Ok(())
}

/// The `t` with `∫ |u − t|^{p−2}(u − t) f = 0` under the trapezoid rule.
pub fn constraint_shift(u: &Profile1D, f: &Weight1D, p: f64) -> Result<f64> {
    check_p(p)?;
    check_grids(u, f)?;
    Ok(Quotient1D::new(f, p).shift(&u.values))
}

/// `∫ f |u'|^p / ∫ f |u − t|^p` with `t` from [`constraint_shift`].
///
/// `u'` is the forward difference on each cell, weighted by the mean of `f`
/// at the cell ends; the denominator uses the trapezoid rule.
pub fn rayleigh_1d(u: &Profile1D, f: &Weight1D, p: f64) -> Result<f64> {
    check_p(p)?;
    check_grids(u, f)?;
    Quotient1D::new(f, p)
        .quotient(&u.values)
        .ok_or_else(|| Error::Degenerate("profile is constant after the constraint shift".into()))
}

#[derive(Clone, Debug)]
pub struct Minimize1dResult {
    pub mu_hat: f64,
    pub minimizer: Profile1D,
    /// `π_p^p / L^p`.
    pub bound: f64,
    /// `mu_hat − bound`.
    pub slack: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Label of the winning start.
    pub start: String,
}

/// Number of starts: cosine, linear and three seeded random profiles.
pub const STARTS_1D: usize = 5;

fn starts(grid: &Grid1D, seed: u64) -> Vec<(String, Vec<f64>)> {
    let l = grid.length();
    let t = grid.nodes();
    let mut out = vec![
        ("cosine".to_string(), t.iter().map(|s| (PI * s / l).cos()).collect()),
        ("linear".to_string(), t.iter().map(|s| s / l).collect()),
    ];
    for j in 0..(STARTS_1D - 2) as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9).wrapping_add(j));
        let coeffs: Vec<f64> = (1..=6).map(|k| rng.gen_range(-1.0..1.0) / k as f64).collect();
        let slope = rng.gen_range(-1.0..1.0);
        let values = t
            .iter()
            .map(|s| {
                slope * s / l
                    + coeffs
                        .iter()
                        .enumerate()
                        .map(|(k, c)| c * ((k + 1) as f64 * PI * s / l).cos())
                        .sum::<f64>()
            })
            .collect();
        out.push((format!("random-{j}"), values));
    }
    out
}

/// Minimizes [`rayleigh_1d`] over profiles on the weight's grid from
/// [`STARTS_1D`] starts run in parallel; returns the smallest quotient.
pub fn minimize_1d(f: &Weight1D, p: f64, seed: u64, settings: &DescentSettings) -> Result<Minimize1dResult> {
    check_p(p)?;
    let q = Quotient1D::new(f, p);
    let runs: Vec<_> = starts(&f.grid, seed)
        .into_par_iter()
        .map(|(label, start)| (label, minimize(&q, &start, settings)))
        .collect();
    let mut best: Option<(String, crate::optimize::DescentResult)> = None;
    let mut iterations = 0;
    for (label, run) in runs {
        let Some(run) = run else { continue };
        iterations += run.iterations;
        if best.as_ref().map_or(true, |(_, b)| run.value < b.value) {
            best = Some((label, run));
        }
    }
    let (label, run) = best.ok_or_else(|| Error::Degenerate("every start was constant".into()))?;
    let bound = (pi_p_closed(p)? / f.grid.length()).powf(p);
    Ok(Minimize1dResult {
        mu_hat: run.value,
        minimizer: Profile1D::new(f.grid.clone(), run.u)?,
        bound,
        slack: run.value - bound,
        iterations,
        converged: run.converged,
        start: label,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> Grid1D {
        Grid1D::new(1.0, n).unwrap()
    }

    #[test]
    fn grid_is_uniform() {
        let g = Grid1D::new(3.0, 101).unwrap();
        let t = g.nodes();
        assert_eq!(t[0], 0.0);
        assert_eq!(t[100], 3.0);
        for w in t.windows(2) {
            assert!(((w[1] - w[0]) - g.spacing()).abs() <= 1e-12 * g.spacing());
        }
        assert!(Grid1D::new(1.0, 15).is_err());
        assert!(Grid1D::new(0.0, 20).is_err());
    }

    #[test]
    fn shift_examples() {
        let g = unit(50);
        let f = Weight1D::exp_linear(g.clone(), -2.0).unwrap();
        let c = Profile1D::from_fn(g.clone(), |_| 4.25).unwrap();
        assert_eq!(constraint_shift(&c, &f, 3.0).unwrap(), 4.25);

        let u = Profile1D::from_fn(g.clone(), |t| (5.0 * t).sin() + t * t).unwrap();
        let mass: Vec<f64> = (0..g.len()).map(|i| g.trapezoid(i) * f.values()[i]).collect();
        let mean = mass.iter().zip(&u.values).map(|(m, u)| m * u).sum::<f64>() / mass.iter().sum::<f64>();
        assert!((constraint_shift(&u, &f, 2.0).unwrap() - mean).abs() < 1e-10);

        let t = constraint_shift(&u, &f, 3.0).unwrap();
        let res: f64 = mass.iter().zip(&u.values).map(|(m, u)| m * (u - t).abs() * (u - t)).sum();
        let scale: f64 = mass.iter().zip(&u.values).map(|(m, u)| m * u.abs().powi(2)).sum();
        assert!(res.abs() <= 1e-10 * scale);
    }

    #[test]
    fn cosine_quotient_and_homogeneity() {
        let g = unit(401);
        let f = Weight1D::constant(g.clone(), 1.0).unwrap();
        let u = Profile1D::from_fn(g.clone(), |t| (PI * t).cos()).unwrap();
        let r = rayleigh_1d(&u, &f, 2.0).unwrap();
        assert!((r - PI * PI).abs() < 1e-4 * PI * PI, "{r}");
        let v = Profile1D::from_fn(g.clone(), |t| -2.0 * (PI * t).cos()).unwrap();
        assert_eq!(rayleigh_1d(&v, &f, 2.0).unwrap(), r);
        let w = Profile1D::from_fn(g, |t| -3.5 * (PI * t).cos()).unwrap();
        assert!((rayleigh_1d(&w, &f, 2.0).unwrap() - r).abs() < 1e-13 * r);
    }

    #[test]
    fn constant_profile_is_degenerate() {
        let g = unit(20);
        let f = Weight1D::constant(g.clone(), 1.0).unwrap();
        let u = Profile1D::from_fn(g, |_| 1.0).unwrap();
        assert!(matches!(rayleigh_1d(&u, &f, 2.0), Err(Error::Degenerate(_))));
        assert!(matches!(rayleigh_1d(&u, &f, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn classical_wirtinger_on_pi() {
        let f = Weight1D::constant(Grid1D::new(PI, 400).unwrap(), 1.0).unwrap();
        let r = minimize_1d(&f, 2.0, 1, &DescentSettings::default()).unwrap();
        assert!((r.mu_hat - 1.0).abs() < 5e-3, "{}", r.mu_hat);
    }

    #[test]
    fn rejects_non_log_concave_weight() {
        let g = unit(20);
        assert!(Weight1D::exp_linear(g.clone(), 3.0).is_ok());
        assert!(Weight1D::gaussian(g.clone(), -1.0, 0.5).is_err());
        let mut values = vec![1.0; 20];
        values[10] = 0.1;
        assert!(Weight1D::checked(Weight1DKind::SectionInduced, g, values).is_err());
    }

    #[test]
    fn section_induced_square_is_constant() {
        let f = Weight1D::section_induced(&ConvexPolygon::unit_square(), &Weight::default(), 0.0, 32).unwrap();
        assert!(f.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        let tri = ConvexPolygon::from_pairs(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let f = Weight1D::section_induced(&tri, &Weight::default(), 0.0, 33).unwrap();
        assert!((f.values()[16] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let u = Profile1D::from_fn(unit(16), |t| t).unwrap();
        let csv = u.to_csv();
        assert!(csv.starts_with("t,u\n0,0\n"));
        assert_eq!(csv.lines().count(), 17);
    }
}
