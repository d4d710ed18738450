//! Batch verification and the default scenario gallery.

use rayon::prelude::*;

use crate::anisotropy::{Anisotropy, DirectionGrid};
use crate::eigen::{verify_bound, DomainSpec, Scenario, VerificationReport};
use crate::error::{Error, Result};
use crate::geometry::polygon::{wulff_shape, ConvexPolygon};
use crate::geometry::weight::Weight;
use crate::Vec2;

/// Exponents cycled through the gallery.
pub const GALLERY_EXPONENTS: [f64; 3] = [1.5, 2.0, 3.0];

/// Convex heptagon inscribed in the unit circle with jittered vertex angles.
/// Every interior angle exceeds 100°.
pub fn gallery_heptagon() -> ConvexPolygon {
    const JITTER: [f64; 7] = [0.11, -0.23, 0.05, 0.31, -0.17, 0.27, -0.08];
    let n = JITTER.len() as f64;
    let pts = JITTER
        .iter()
        .enumerate()
        .map(|(k, j)| {
            let a = std::f64::consts::TAU * (k as f64 + *j) / n;
            Vec2::new(a.cos(), a.sin())
        })
        .collect();
    ConvexPolygon::new(pts).expect("heptagon is convex")
}

/// Three domains × two anisotropies × two weights, `p` cycling through
/// [`GALLERY_EXPONENTS`].
pub fn gallery() -> Vec<Scenario> {
    let grid = DirectionGrid::default();
    let ellipse = Anisotropy::ellipse(1.0, 2.0).expect("valid ellipse");
    let wulff = wulff_shape(&ellipse, 1.0, 256, &grid).expect("valid wulff shape");
    let domains = [
        ("square", ConvexPolygon::unit_square(), DomainSpec::Polygon),
        ("heptagon", gallery_heptagon(), DomainSpec::Polygon),
        (
            "wulff",
            wulff,
            DomainSpec::Wulff { anisotropy: ellipse.clone(), radius: 1.0, m: 256 },
        ),
    ];
    let anisotropies = [
        ("ellipse", ellipse),
        ("halfspace", Anisotropy::half_space_gauge(2.0).expect("valid gauge")),
    ];
    let mut out = Vec::new();
    for (dname, poly, spec) in &domains {
        for (aname, aniso) in &anisotropies {
            for wname in ["constant", "gaussian"] {
                let weight = match wname {
                    "constant" => Weight::default(),
                    _ => Weight::gaussian(1.0, poly.centroid()).expect("valid weight"),
                };
                let p = GALLERY_EXPONENTS[out.len() % GALLERY_EXPONENTS.len()];
                let id = format!("{dname}-{aname}-{wname}-p{p}");
                let s = Scenario::new(id, poly.clone(), aniso.clone(), weight, p)
                    .expect("gallery scenario is valid")
                    .with_domain(spec.clone())
                    .with_seed(out.len() as u64);
                out.push(s);
            }
        }
    }
    out
}

/// Reports in scenario order plus `(scenario_id, error)` for scenarios that
/// could not be solved.
#[derive(Clone, Debug, Default)]
pub struct SuiteRun {
    pub reports: Vec<VerificationReport>,
    pub failures: Vec<(String, String)>,
}

impl SuiteRun {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty() && self.reports.iter().all(|r| r.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            0
        } else {
            1
        }
    }
}

/// Verifies every scenario on a pool of `jobs` threads (0 = all cores).
/// Output order matches input order.
pub fn run_suite(scenarios: &[Scenario], jobs: usize) -> Result<SuiteRun> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))?;
    let results: Vec<_> =
        pool.install(|| scenarios.par_iter().map(|s| (s.id.clone(), verify_bound(s))).collect());
    let mut run = SuiteRun::default();
    for (id, r) in results {
        match r {
            Ok(report) => run.reports.push(report),
            Err(e) => run.failures.push((id, e.to_string())),
        }
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gallery_shape() {
        let g = gallery();
        assert_eq!(g.len(), 12);
        for s in &g {
            assert!(s.validate().is_ok());
        }
        let ps: Vec<f64> = g.iter().map(|s| s.p).collect();
        for p in GALLERY_EXPONENTS {
            assert!(ps.contains(&p));
        }
        let mut ids: Vec<_> = g.iter().map(|s| s.id.clone()).collect();
        ids.dedup();
        assert_eq!(ids.len(), 12);
    }

    #[test]
    fn heptagon_angles_are_wide() {
        let v = gallery_heptagon();
        let pts = v.vertices();
        let n = pts.len();
        for i in 0..n {
            let a = pts[(i + n - 1) % n] - pts[i];
            let b = pts[(i + 1) % n] - pts[i];
            assert!(a.angle(&b).to_degrees() > 100.0);
        }
    }

    #[test]
    fn empty_suite_passes() {
        let run = run_suite(&[], 2).unwrap();
        assert!(run.reports.is_empty());
        assert_eq!(run.exit_code(), 0);
    }
}
