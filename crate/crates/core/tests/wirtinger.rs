use std::f64::consts::PI;

use poincare_core::optimize::DescentSettings;
use poincare_core::wirtinger::{
    minimize_1d, pi_p_closed, pi_p_quadrature, rayleigh_1d, Grid1D, Profile1D, Weight1D,
};
use proptest::prelude::*;

fn settings() -> DescentSettings {
    DescentSettings::default()
}

#[test]
fn closed_form_matches_quadrature() {
    for p in [1.5, 2.0, 3.0, 4.0] {
        let a = pi_p_closed(p).unwrap();
        let b = pi_p_quadrature(p, 1e-10).unwrap();
        assert!((a - b).abs() <= 1e-8, "p={p}: {a} vs {b}");
    }
    // Regression value, confirmed by the quadrature above.
    assert!((pi_p_closed(3.0).unwrap() - 3.046_991_999_046_17).abs() < 1e-12);
    assert!((pi_p_quadrature(1.5, 1e-10).unwrap() - pi_p_closed(3.0).unwrap()).abs() < 1e-8);
}

proptest! {
    #[test]
    fn conjugate_exponents_agree(p in 1.0001f64..10.0) {
        let a = pi_p_closed(p).unwrap();
        let b = pi_p_closed(p / (p - 1.0)).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn quotient_is_zero_homogeneous(c in prop::sample::select(vec![-4.0, -0.5, 0.25, 2.0, 8.0]), p in 1.2f64..4.0) {
        let g = Grid1D::new(2.0, 64).unwrap();
        let f = Weight1D::exp_linear(g.clone(), -1.0).unwrap();
        let u = Profile1D::from_fn(g.clone(), |t| (1.3 * t).sin() + 0.2 * t).unwrap();
        let v = Profile1D::from_fn(g, |t| c * ((1.3 * t).sin() + 0.2 * t)).unwrap();
        let (a, b) = (rayleigh_1d(&u, &f, p).unwrap(), rayleigh_1d(&v, &f, p).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }
}

#[test]
fn cosine_quotient_refines_at_second_order() {
    let err = |n: usize| {
        let g = Grid1D::new(1.0, n).unwrap();
        let f = Weight1D::constant(g.clone(), 1.0).unwrap();
        let u = Profile1D::from_fn(g, |t| (PI * t).cos()).unwrap();
        (rayleigh_1d(&u, &f, 2.0).unwrap() - PI * PI).abs()
    };
    let (coarse, fine) = (err(50), err(100));
    assert!(coarse / fine >= 3.5, "{coarse} / {fine}");
}

#[test]
fn constant_weight_attains_the_sharp_constant() {
    for (p, l) in [(1.5, 1.0), (2.0, 1.0), (3.0, 1.0), (2.0, PI)] {
        let f = Weight1D::constant(Grid1D::new(l, 2000).unwrap(), 1.0).unwrap();
        let r = minimize_1d(&f, p, 7, &settings()).unwrap();
        let ratio = r.mu_hat / r.bound;
        assert!((0.99..=1.01).contains(&ratio), "p={p}, L={l}: ratio {ratio}");
    }
}

#[test]
fn exponential_weight_matches_sturm_liouville_oracle() {
    // −(e^{−3t}u')' = μ e^{−3t} u with Neumann ends: μ = π² + 9/4.
    let exact = PI * PI + 2.25;
    let coarse = minimize_1d(&Weight1D::exp_linear(Grid1D::new(1.0, 500).unwrap(), -3.0).unwrap(), 2.0, 3, &settings())
        .unwrap();
    let fine = minimize_1d(&Weight1D::exp_linear(Grid1D::new(1.0, 2000).unwrap(), -3.0).unwrap(), 2.0, 3, &settings())
        .unwrap();
    assert!(fine.mu_hat >= PI * PI);
    assert!((fine.mu_hat - exact).abs() < 0.01 * exact, "{}", fine.mu_hat);
    assert!((coarse.mu_hat - fine.mu_hat).abs() < 0.01 * fine.mu_hat);
}

#[test]
fn log_concave_weights_respect_the_bound() {
    for p in [1.5, 2.0, 3.0] {
        let g = Grid1D::new(1.0, 1000).unwrap();
        for f in [
            Weight1D::exp_linear(g.clone(), -3.0).unwrap(),
            Weight1D::gaussian(g.clone(), 4.0, 0.3).unwrap(),
        ] {
            let r = minimize_1d(&f, p, 11, &settings()).unwrap();
            assert!(r.mu_hat / r.bound >= 0.99, "p={p} {:?}: {}", f.kind(), r.mu_hat / r.bound);
        }
    }
}

#[test]
fn scaling_the_segment() {
    // f(t) = e^{−t} on [0, 2] is f∘scale with f(s) = e^{−2s} on [0, 1].
    let p = 3.0;
    let long = minimize_1d(&Weight1D::exp_linear(Grid1D::new(2.0, 1000).unwrap(), -1.0).unwrap(), p, 1, &settings())
        .unwrap();
    let unit = minimize_1d(&Weight1D::exp_linear(Grid1D::new(1.0, 1000).unwrap(), -2.0).unwrap(), p, 1, &settings())
        .unwrap();
    let predicted = 2f64.powf(-p) * unit.mu_hat;
    assert!((long.mu_hat - predicted).abs() < 0.01 * predicted);
}
