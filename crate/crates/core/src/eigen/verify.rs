use serde::{Deserialize, Serialize};

use super::solver::{minimize_nd, DomainSpec, Scenario};
use crate::anisotropy::AnisotropyKind;
use crate::error::Result;
use crate::geometry::slicing::SlicingTolerances;
use crate::wirtinger::pi_p_closed;

/// Relative shortfall of `mu_hat` below the sharp bound still counted as a pass.
pub const SOLVER_SLACK: f64 = 0.02;

/// Mesh sizes above this fraction of the diameter are reported as under-resolved.
pub const UNDER_RESOLVED_H_REL: f64 = 0.05;

/// Resolution and tolerance settings behind one report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverMetadata {
    pub p: f64,
    pub domain: String,
    pub anisotropy: String,
    pub weight: String,
    pub converged: bool,
    pub best_start: String,
    pub starts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub smoothing: f64,
    pub solver_slack: f64,
    pub nodes: usize,
    pub triangles: usize,
    pub min_angle_deg: f64,
    pub polar_grid_size: usize,
    pub polar_refinement_levels: usize,
    pub shift_tol_rel: f64,
    pub area_tol_rel: f64,
    pub mean_tol: f64,
    pub mesh_tol_rel: f64,
    pub under_resolved: bool,
    pub numerator_quadrature: String,
    pub denominator_quadrature: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub scenario_id: String,
    pub mu_hat: f64,
    pub pi_p: f64,
    pub d_h: f64,
    pub d_euclid: f64,
    /// `max_{|ν|=1} H°(ν)`.
    pub h_polar_max: f64,
    /// `(π_p / D_H)^p`.
    pub sharp_bound: f64,
    /// `(π_p / (D_E · h_polar_max))^p`.
    pub naive_bound: f64,
    pub ratio: f64,
    pub pass: bool,
    pub h: f64,
    pub iterations: usize,
    pub seed: u64,
    pub slack: f64,
    pub metadata: SolverMetadata,
}

impl VerificationReport {
    /// Column names of the CSV export, in order.
    pub const CSV_FIELDS: [&'static str; 14] = [
        "scenario_id",
        "mu_hat",
        "pi_p",
        "d_h",
        "d_euclid",
        "h_polar_max",
        "sharp_bound",
        "naive_bound",
        "ratio",
        "pass",
        "h",
        "iterations",
        "seed",
        "slack",
    ];

    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.scenario_id.clone(),
            self.mu_hat.to_string(),
            self.pi_p.to_string(),
            self.d_h.to_string(),
            self.d_euclid.to_string(),
            self.h_polar_max.to_string(),
            self.sharp_bound.to_string(),
            self.naive_bound.to_string(),
            self.ratio.to_string(),
            self.pass.to_string(),
            self.h.to_string(),
            self.iterations.to_string(),
            self.seed.to_string(),
            self.slack.to_string(),
        ]
    }
}

/// Solves the scenario and compares `mu_hat` with the sharp and naive bounds.
pub fn verify_bound(s: &Scenario) -> Result<VerificationReport> {
    let solved = minimize_nd(s)?;
    let pi_p = pi_p_closed(s.p)?;
    let d_h = s.polygon.anisotropic_diameter(&s.anisotropy, &s.grid)?;
    let d_euclid = s.polygon.euclidean_diameter();
    let h_polar_max = s.anisotropy.max_polar_on_circle(&s.grid)?;
    let sharp_bound = (pi_p / d_h).powf(s.p);
    let naive_bound = (pi_p / (d_euclid * h_polar_max)).powf(s.p);
    let ratio = solved.mu_hat / sharp_bound;
    let mesh = solved.minimizer.mesh();
    let tol = SlicingTolerances::default();
    let domain = match &s.domain {
        DomainSpec::Polygon => "polygon".to_string(),
        DomainSpec::Wulff { anisotropy, .. } => format!("wulff:{}", anisotropy.kind().tag()),
    };
    let anisotropy = match s.anisotropy.kind() {
        AnisotropyKind::Ellipse { a, b } => format!("ellipse({a},{b})"),
        AnisotropyKind::LqNorm { q } => format!("lq_norm({q})"),
        AnisotropyKind::HalfSpaceGauge { c } => format!("half_space_gauge({c})"),
        k => k.tag().to_string(),
    };
    Ok(VerificationReport {
        scenario_id: s.id.clone(),
        mu_hat: solved.mu_hat,
        pi_p,
        d_h,
        d_euclid,
        h_polar_max,
        sharp_bound,
        naive_bound,
        ratio,
        pass: ratio >= 1.0 - SOLVER_SLACK,
        h: s.h,
        iterations: solved.iterations,
        seed: s.seed,
        slack: solved.slack,
        metadata: SolverMetadata {
            p: s.p,
            domain,
            anisotropy,
            weight: s.weight.tag().to_string(),
            converged: solved.converged,
            best_start: solved.start,
            starts: s.solver.starts,
            max_iter: s.solver.max_iter,
            tol: s.solver.tol,
            smoothing: solved.smoothing,
            solver_slack: SOLVER_SLACK,
            nodes: mesh.points().len(),
            triangles: mesh.triangles().len(),
            min_angle_deg: mesh.min_angle_deg(),
            polar_grid_size: s.grid.len(),
            polar_refinement_levels: s.grid.refinement_levels(),
            shift_tol_rel: 1e-12,
            area_tol_rel: tol.area_rel,
            mean_tol: tol.mean,
            mesh_tol_rel: tol.mesh_rel,
            under_resolved: s.h > UNDER_RESOLVED_H_REL * d_euclid,
            numerator_quadrature: "centroid".into(),
            denominator_quadrature: "nodal".into(),
        },
    })
}
