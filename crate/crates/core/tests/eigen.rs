use std::f64::consts::PI;
use std::sync::Arc;

use poincare_core::eigen::{
    gradient_pw, minimize_nd, rayleigh_nd, triangulate, verify_bound, Field2D, Scenario, SolverSettings,
};
use poincare_core::suite::run_suite;
use poincare_core::{Anisotropy, ConvexPolygon, Vec2, Weight};

fn scenario(id: &str, poly: ConvexPolygon, h: Anisotropy, w: Weight, p: f64, mesh: f64) -> Scenario {
    Scenario::new(id, poly, h, w, p).unwrap().with_h(mesh).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn trapezoid() -> ConvexPolygon {
    ConvexPolygon::from_pairs(&[[0.0, 0.0], [1.6, 0.0], [1.2, 0.9], [0.2, 1.0]]).unwrap()
}

#[test]
fn gradients_of_simple_fields() {
    let mesh = Arc::new(triangulate(&trapezoid(), 0.05).unwrap());
    let linear = Field2D::from_fn(mesh.clone(), |x| 3.0 * x.x - 2.0 * x.y).unwrap();
    for g in gradient_pw(&linear).unwrap() {
        assert!((g - Vec2::new(3.0, -2.0)).norm() < 1e-10);
    }
    let constant = Field2D::from_fn(mesh.clone(), |_| 4.0).unwrap();
    assert!(gradient_pw(&constant).unwrap().iter().all(|g| g.norm() < 1e-12));

    // ∇(x²) = (2x, 0) up to a multiple of the element width.
    let square = Field2D::from_fn(mesh.clone(), |x| x.x * x.x).unwrap();
    let grads = gradient_pw(&square).unwrap();
    for (t, g) in mesh.triangles().iter().zip(&grads) {
        let c = t.iter().map(|&i| mesh.points()[i]).fold(Vec2::zeros(), |a, b| a + b) / 3.0;
        assert!((g - Vec2::new(2.0 * c.x, 0.0)).norm() < 4.0 * 0.05, "{g:?} at {c:?}");
    }
}

#[test]
fn minimizer_is_below_every_trial_field() {
    let s = scenario(
        "trap",
        trapezoid(),
        Anisotropy::ellipse(1.0, 1.5).unwrap(),
        Weight::gaussian(0.7, Vec2::new(0.8, 0.5)).unwrap(),
        2.5,
        0.05,
    );
    let r = minimize_nd(&s).unwrap();
    let mesh = r.minimizer.mesh().clone();
    let trials: [&dyn Fn(Vec2) -> f64; 4] = [
        &|x| x.x,
        &|x| x.y,
        &|x| (PI * x.x / 1.6).cos() + 0.3 * x.y,
        &|x| x.x * x.y - 0.4 * x.y * x.y,
    ];
    for f in trials {
        let field = Field2D::from_fn(mesh.clone(), f).unwrap();
        let q = rayleigh_nd(&field, &s.anisotropy, &s.weight, s.p).unwrap();
        assert!(r.mu_hat <= q * (1.0 + 1e-9), "{} > {q}", r.mu_hat);
    }
    let again = rayleigh_nd(&r.minimizer, &s.anisotropy, &s.weight, s.p).unwrap();
    assert!(rel(again, r.mu_hat) < 1e-6);
}

#[test]
fn rotation_covariance() {
    let angle = 0.7;
    let h = Anisotropy::ellipse(1.0, 2.0).unwrap();
    let base = scenario("base", trapezoid(), h.clone(), Weight::default(), 2.0, 0.04);
    let turned = scenario("turned", trapezoid().rotated(-angle), h.rotate(angle), Weight::default(), 2.0, 0.04);
    let (a, b) = (minimize_nd(&base).unwrap().mu_hat, minimize_nd(&turned).unwrap().mu_hat);
    assert!(rel(b, a) < 0.03, "{a} vs {b}");
}

#[test]
fn halving_the_mesh_changes_little() {
    let solve = |h: f64| {
        let s = scenario("sq", ConvexPolygon::unit_square(), Anisotropy::euclidean(), Weight::default(), 2.0, h);
        minimize_nd(&s).unwrap().mu_hat
    };
    let (coarse, fine) = (solve(0.04), solve(0.02));
    assert!(rel(coarse, fine) < 0.01, "{coarse} vs {fine}");
    assert!(rel(fine, PI * PI) < 0.02);
}

#[test]
fn naive_bound_never_beats_the_sharp_one() {
    let grid_cases = [
        Anisotropy::ellipse(1.0, 2.0).unwrap().rotate(0.4),
        Anisotropy::half_space_gauge(2.0).unwrap(),
        Anisotropy::lq_norm(3.0).unwrap(),
    ];
    for (k, h) in grid_cases.into_iter().enumerate() {
        let s = scenario(&format!("case{k}"), trapezoid(), h, Weight::default(), 1.5 + k as f64 * 0.5, 0.08)
            .with_solver(SolverSettings { max_iter: 500, starts: 2, ..SolverSettings::default() })
            .unwrap();
        let r = verify_bound(&s).unwrap();
        assert!(r.naive_bound <= r.sharp_bound * (1.0 + 1e-9), "{}: {} > {}", r.scenario_id, r.naive_bound, r.sharp_bound);
        assert!(r.sharp_bound <= r.mu_hat * (1.0 + r.metadata.solver_slack));
        assert!(!r.metadata.under_resolved);
    }
}

#[test]
fn under_resolved_scenario_is_flagged_and_the_suite_continues() {
    let sq = ConvexPolygon::unit_square();
    let fine = scenario("fine", sq.clone(), Anisotropy::euclidean(), Weight::default(), 2.0, 0.05);
    let coarse = scenario("coarse", sq.clone(), Anisotropy::euclidean(), Weight::default(), 2.0, 0.34);
    let mut broken = fine.clone();
    broken.id = "broken".into();
    broken.p = 0.5;
    let run = run_suite(&[coarse, broken, fine], 2).unwrap();
    assert_eq!(run.reports.len(), 2);
    assert_eq!(run.failures.len(), 1);
    assert_eq!(run.failures[0].0, "broken");
    let coarse = run.reports.iter().find(|r| r.scenario_id == "coarse").unwrap();
    assert!(coarse.metadata.under_resolved);
    assert!(coarse.mu_hat.is_finite());
    let fine = run.reports.iter().find(|r| r.scenario_id == "fine").unwrap();
    assert!(fine.pass && !fine.metadata.under_resolved);
    assert_ne!(run.exit_code(), 0);
}
