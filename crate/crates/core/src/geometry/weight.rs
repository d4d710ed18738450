//! Positive log-concave weights.

use rand::Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::geometry::polygon::ConvexPolygon;
use crate::Vec2;

#[derive(Clone, Debug, PartialEq)]
pub enum Weight {
    Constant { value: f64 },
    /// `exp(⟨c, x⟩)`.
    ExpLinear { c: Vec2 },
    /// `exp(−c·|x − center|²)`.
    Gaussian { c: f64, center: Vec2 },
}

impl Default for Weight {
    fn default() -> Self {
        Weight::Constant { value: 1.0 }
    }
}

impl Weight {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "constant weight must be positive, got {value}"
            )));
        }
        Ok(Weight::Constant { value })
    }

    pub fn exp_linear(c: Vec2) -> Result<Self> {
        if !(c.x.is_finite() && c.y.is_finite()) {
            return Err(Error::InvalidInput("exp_linear slope is not finite".into()));
        }
        Ok(Weight::ExpLinear { c })
    }

    pub fn gaussian(c: f64, center: Vec2) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && center.x.is_finite() && center.y.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "gaussian weight needs c > 0 and a finite center, got c={c}"
            )));
        }
        Ok(Weight::Gaussian { c, center })
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Weight::Constant { .. } => "constant",
            Weight::ExpLinear { .. } => "exp_linear",
            Weight::Gaussian { .. } => "gaussian",
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Weight::Constant { .. })
    }

    pub fn log_eval(&self, x: Vec2) -> f64 {
        match self {
            Weight::Constant { value } => value.ln(),
            Weight::ExpLinear { c } => c.dot(&x),
            Weight::Gaussian { c, center } => -c * (x - center).norm_squared(),
        }
    }

    pub fn eval(&self, x: Vec2) -> f64 {
        match self {
            Weight::Constant { value } => *value,
            _ => self.log_eval(x).exp(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Weight::Constant { value } => json!({"kind": "constant", "params": {"value": value}}),
            Weight::ExpLinear { c } => json!({"kind": "exp_linear", "params": {"c": [c.x, c.y]}}),
            Weight::Gaussian { c, center } => json!({
                "kind": "gaussian",
                "params": {"c": c, "center": [center.x, center.y]}
            }),
        }
    }

    /// Midpoint test of log-concavity along `samples` random chords of `poly`:
    /// `log ω(mid) ≥ (log ω(a) + log ω(b))/2 − 1e-10`. Returns the worst
    /// violation found (negative when the test fails).
    pub fn check_log_concave(&self, poly: &ConvexPolygon, samples: usize, rng: &mut impl Rng) -> f64 {
        let v = poly.vertices();
        let random_point = |rng: &mut dyn rand::RngCore| -> Vec2 {
            let mut w: Vec<f64> = (0..v.len()).map(|_| rng.gen::<f64>()).collect();
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= s);
            v.iter().zip(&w).map(|(p, w)| p * *w).sum()
        };
        let mut worst = f64::INFINITY;
        for _ in 0..samples {
            let a = random_point(rng);
            let b = random_point(rng);
            let gap = self.log_eval((a + b) / 2.0) - 0.5 * (self.log_eval(a) + self.log_eval(b));
            worst = worst.min(gap + 1e-10);
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gallery_is_log_concave_and_positive() {
        let poly = ConvexPolygon::regular(7, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for w in [
            Weight::constant(2.5).unwrap(),
            Weight::exp_linear(Vec2::new(1.0, -3.0)).unwrap(),
            Weight::gaussian(2.0, Vec2::new(0.3, 0.1)).unwrap(),
        ] {
            assert!(w.check_log_concave(&poly, 500, &mut rng) >= 0.0, "{w:?}");
            for v in poly.vertices() {
                assert!(w.eval(*v) > 0.0);
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Weight::constant(0.0).is_err());
        assert!(Weight::gaussian(-1.0, Vec2::zeros()).is_err());
        assert!(Weight::exp_linear(Vec2::new(f64::NAN, 0.0)).is_err());
    }
}
