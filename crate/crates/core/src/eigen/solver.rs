use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::field::Field2D;
use super::mesh::{triangulate, TriMesh};
use super::quotient::RayleighNd;
use crate::anisotropy::{Anisotropy, DirectionGrid, DEFAULT_SMOOTHING};
use crate::error::{Error, Result};
use crate::geometry::polygon::ConvexPolygon;
use crate::geometry::weight::Weight;
use crate::optimize::{minimize, DescentSettings, ShiftInvariantQuotient};
use crate::wirtinger::pi_p_closed;
use crate::Vec2;

/// How the domain was specified; Wulff domains keep their generating gauge.
#[derive(Clone, Debug)]
pub enum DomainSpec {
    Polygon,
    Wulff { anisotropy: Anisotropy, radius: f64, m: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverSettings {
    pub max_iter: usize,
    /// Stop when the log quotient drops by less than this over ten iterations.
    pub tol: f64,
    /// Number of starts, taken in order from x-linear, y-linear,
    /// diameter-aligned linear, then seeded random fields.
    pub starts: usize,
    /// Half-space gauge smoothing used during descent.
    pub smoothing: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { max_iter: 5000, tol: 1e-9, starts: 5, smoothing: DEFAULT_SMOOTHING }
    }
}

/// Everything needed to estimate `μ` and check the bound on one domain.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub id: String,
    pub polygon: ConvexPolygon,
    pub domain: DomainSpec,
    pub anisotropy: Anisotropy,
    pub weight: Weight,
    pub p: f64,
    pub h: f64,
    pub solver: SolverSettings,
    pub seed: u64,
    pub grid: DirectionGrid,
}

impl Scenario {
    /// Defaults: `h = 0.02·diameter`, seed 0, default solver and polar grid.
    pub fn new(
        id: impl Into<String>,
        polygon: ConvexPolygon,
        anisotropy: Anisotropy,
        weight: Weight,
        p: f64,
    ) -> Result<Self> {
        let h = 0.02 * polygon.euclidean_diameter();
        let s = Self {
            id: id.into(),
            polygon,
            domain: DomainSpec::Polygon,
            anisotropy,
            weight,
            p,
            h,
            solver: SolverSettings::default(),
            seed: 0,
            grid: DirectionGrid::default(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_h(mut self, h: f64) -> Result<Self> {
        self.h = h;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_solver(mut self, solver: SolverSettings) -> Result<Self> {
        self.solver = solver;
        self.validate()?;
        Ok(self)
    }

    pub fn with_domain(mut self, domain: DomainSpec) -> Self {
        self.domain = domain;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::Domain(format!("exponent must satisfy 1 < p < ∞, got {}", self.p)));
        }
        let diam = self.polygon.euclidean_diameter();
        if !(self.h > 0.0 && self.h < diam / 4.0) {
            return Err(Error::InvalidInput(format!(
                "mesh size {} must lie in (0, diameter/4 = {})",
                self.h,
                diam / 4.0
            )));
        }
        if self.solver.starts == 0 || self.solver.max_iter == 0 || !(self.solver.tol > 0.0) {
            return Err(Error::InvalidInput("solver needs starts ≥ 1, max_iter ≥ 1, tol > 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub mu_hat: f64,
    pub minimizer: Field2D,
    /// Descent iterations summed over all starts.
    pub iterations: usize,
    /// `mu_hat − (π_p / D_H)^p`.
    pub slack: f64,
    pub converged: bool,
    pub start: String,
    /// Smoothing used during descent; `mu_hat` always uses the exact gauge.
    pub smoothing: f64,
}

fn start_fields(s: &Scenario, mesh: &TriMesh) -> Vec<(String, Vec<f64>)> {
    let pts = mesh.points();
    let pair = s.polygon.euclidean_diameter_pair();
    let v = s.polygon.vertices();
    let axis = (v[pair.to] - v[pair.from]).normalize();
    let (lo, hi) = pts.iter().fold(
        (Vec2::repeat(f64::INFINITY), Vec2::repeat(f64::NEG_INFINITY)),
        |(lo, hi), p| (lo.inf(p), hi.sup(p)),
    );
    let ext = hi - lo;
    let mut out: Vec<(String, Vec<f64>)> = vec![
        ("x-linear".into(), pts.iter().map(|p| p.x).collect()),
        ("y-linear".into(), pts.iter().map(|p| p.y).collect()),
        ("diameter-linear".into(), pts.iter().map(|p| p.dot(&axis)).collect()),
    ];
    let mut k = 0u64;
    while out.len() < s.solver.starts {
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed.wrapping_mul(0x2545_F491_4F6C_DD1D).wrapping_add(k));
        k += 1;
        let modes: Vec<(f64, f64, f64)> = (0..=3)
            .flat_map(|i| (0..=3 - i).map(move |j| (i as f64, j as f64)))
            .filter(|&(i, j)| i + j > 0.0)
            .map(|(i, j)| (i, j, rng.gen_range(-1.0..1.0) / (i + j)))
            .collect();
        let values: Vec<f64> = pts
            .iter()
            .map(|p| {
                let (x, y) = ((p.x - lo.x) / ext.x, (p.y - lo.y) / ext.y);
                modes.iter().map(|(i, j, a)| a * (i * PI * x).cos() * (j * PI * y).cos()).sum()
            })
            .collect();
        out.push((format!("random-{}", k - 1), values));
    }
    out.truncate(s.solver.starts);
    out
}

/// Multi-start descent on nodal values; returns the smallest exact-gauge
/// quotient among the descent results and the start fields themselves.
pub fn minimize_nd(s: &Scenario) -> Result<SolveResult> {
    s.validate()?;
    let mesh = Arc::new(triangulate(&s.polygon, s.h)?);
    let smooth = matches!(s.anisotropy.kind(), crate::anisotropy::AnisotropyKind::HalfSpaceGauge { .. });
    let smoothing = if smooth { s.solver.smoothing } else { 0.0 };
    let descent = RayleighNd::new(&mesh, &s.anisotropy, &s.weight, s.p, smoothing)?;
    let exact = RayleighNd::new(&mesh, &s.anisotropy, &s.weight, s.p, 0.0)?;
    let settings = DescentSettings { max_iter: s.solver.max_iter, tol: s.solver.tol, ..Default::default() };

    // Half-space gauge: warm-started continuation δ = 10⁻¹, 10⁻², … down to
    // the configured smoothing.
    let mut stages = Vec::new();
    if smoothing > 0.0 {
        let mut d = 0.1;
        while d > smoothing * 1.000_001 {
            stages.push(descent.with_smoothing(d));
            d *= 0.1;
        }
    }
    stages.push(descent);
    let coarse = DescentSettings {
        max_iter: settings.max_iter.div_ceil(4),
        tol: settings.tol.max(1e-6),
        ..settings.clone()
    };

    let runs: Vec<_> = start_fields(s, &mesh)
        .into_par_iter()
        .map(|(label, start)| {
            let mut u = start.clone();
            let mut total = 0;
            let mut last = None;
            for (k, q) in stages.iter().enumerate() {
                let stage = if k + 1 < stages.len() { &coarse } else { &settings };
                match minimize(q, &u, stage) {
                    Some(r) => {
                        total += r.iterations;
                        u = r.u.clone();
                        last = Some(r);
                    }
                    None => break,
                }
            }
            let run = last.map(|mut r| {
                r.iterations = total;
                r
            });
            (label, start, run)
        })
        .collect();

    let mut best: Option<(f64, String, Vec<f64>, bool)> = None;
    let mut iterations = 0;
    let mut consider = |value: Option<f64>, label: String, u: Vec<f64>, conv: bool| {
        if let Some(v) = value.filter(|v| v.is_finite()) {
            if best.as_ref().map_or(true, |b| v < b.0) {
                best = Some((v, label, u, conv));
            }
        }
    };
    for (label, start, run) in runs {
        if let Some(run) = run {
            iterations += run.iterations;
            consider(exact.quotient(&run.u), label.clone(), run.u, run.converged);
        }
        consider(exact.quotient(&start), format!("{label} (start)"), start, false);
    }
    let (mu_hat, start, mut u, converged) =
        best.ok_or_else(|| Error::Degenerate("every start field was constant".into()))?;
    let t = exact.shift(&u);
    u.iter_mut().for_each(|v| *v -= t);

    let d_h = s.polygon.anisotropic_diameter(&s.anisotropy, &s.grid)?;
    let sharp = (pi_p_closed(s.p)? / d_h).powf(s.p);
    Ok(SolveResult {
        mu_hat,
        minimizer: Field2D::new(mesh, u)?,
        iterations,
        slack: mu_hat - sharp,
        converged,
        start,
        smoothing,
    })
}
