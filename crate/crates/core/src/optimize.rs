//! Limited-memory quasi-Newton descent on `ln N(u) − ln min_t D(u − t)`.

use std::collections::VecDeque;

/// A Rayleigh-type quotient whose numerator ignores constant shifts and whose
/// denominator is evaluated after the optimal scalar shift.
pub trait ShiftInvariantQuotient {
    fn dim(&self) -> usize;
    /// Common homogeneity degree of numerator and denominator.
    fn degree(&self) -> f64;
    /// The `t` with `∂_t D(u − t) = 0`.
    fn shift(&self, u: &[f64]) -> f64;
    /// `N(u)`; fills `grad` with `∇N(u)` when given.
    fn numerator(&self, u: &[f64], grad: Option<&mut [f64]>) -> f64;
    /// `D(w)`; fills `grad` with `∇D(w)` when given.
    fn denominator(&self, w: &[f64], grad: Option<&mut [f64]>) -> f64;

    /// `ln N(u) − ln D(u − t*)` and its gradient at an already shifted `u`.
    fn log_quotient(&self, u: &[f64], grad: &mut [f64]) -> f64 {
        let mut gd = vec![0.0; u.len()];
        let n = self.numerator(u, Some(grad));
        let d = self.denominator(u, Some(&mut gd));
        if !(n.is_finite() && d > 0.0 && d.is_finite() && n >= 0.0) {
            grad.iter_mut().for_each(|g| *g = f64::NAN);
            return f64::NAN;
        }
        for (g, b) in grad.iter_mut().zip(&gd) {
            *g = *g / n - b / d;
        }
        n.ln() - d.ln()
    }

    /// `N(u) / D(u − t*)`, `None` when the shifted field vanishes.
    fn quotient(&self, u: &[f64]) -> Option<f64> {
        let t = self.shift(u);
        let w: Vec<f64> = u.iter().map(|x| x - t).collect();
        let d = self.denominator(&w, None);
        (d > 0.0 && d.is_finite()).then(|| self.numerator(&w, None) / d)
    }
}

#[derive(Clone, Debug)]
pub struct DescentSettings {
    pub max_iter: usize,
    /// Stop once the log quotient decreased by less than `tol` over `window`
    /// iterations.
    pub tol: f64,
    pub window: usize,
    pub memory: usize,
}

impl Default for DescentSettings {
    fn default() -> Self {
        Self { max_iter: 5000, tol: 1e-9, window: 10, memory: 12 }
    }
}

#[derive(Clone, Debug)]
pub struct DescentResult {
    /// Minimizer, shifted to satisfy the constraint.
    pub u: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn shifted(q: &dyn ShiftInvariantQuotient, u: &mut [f64]) {
    let t = q.shift(u);
    u.iter_mut().for_each(|x| *x -= t);
}

/// Minimizes the quotient from `start`. Returns `None` if the start is
/// constant (zero denominator after the shift).
pub fn minimize(
    q: &dyn ShiftInvariantQuotient,
    start: &[f64],
    settings: &DescentSettings,
) -> Option<DescentResult> {
    let n = q.dim();
    assert_eq!(start.len(), n, "start vector has wrong length");
    let mut x = start.to_vec();
    shifted(q, &mut x);
    let mut g = vec![0.0; n];
    let mut f = q.log_quotient(&x, &mut g);
    if !f.is_finite() {
        return None;
    }

    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut history = vec![f];
    let mut converged = false;
    let mut iterations = 0;
    let mut xn = vec![0.0; n];
    let mut gn = vec![0.0; n];

    while iterations < settings.max_iter {
        iterations += 1;
        let mut d = two_loop(&g, &pairs);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            pairs.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        if slope == 0.0 {
            converged = true;
            break;
        }
        let mut step = if pairs.is_empty() {
            let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let gmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            (0.1 * scale / gmax).min(1.0)
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..60 {
            for i in 0..n {
                xn[i] = x[i] + step * d[i];
            }
            let t = q.shift(&xn);
            xn.iter_mut().for_each(|v| *v -= t);
            let fnew = q.log_quotient(&xn, &mut gn);
            if fnew.is_finite() && fnew <= f + 1e-4 * step * slope {
                accepted = Some((fnew, t));
                break;
            }
            step *= 0.5;
        }
        let Some((fnew, t)) = accepted else {
            if pairs.is_empty() {
                converged = true;
                break;
            }
            pairs.clear();
            continue;
        };

        // Curvature pair excludes the shift.
        let s: Vec<f64> = (0..n).map(|i| xn[i] + t - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| gn[i] - g[i]).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if pairs.len() == settings.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        std::mem::swap(&mut x, &mut xn);
        std::mem::swap(&mut g, &mut gn);
        f = fnew;

        let dn = q.denominator(&x, None);
        if !(0.25..=4.0).contains(&dn) {
            let lambda = dn.powf(-1.0 / q.degree());
            x.iter_mut().for_each(|v| *v *= lambda);
            g.iter_mut().for_each(|v| *v /= lambda);
            pairs.clear();
        }

        history.push(f);
        let k = history.len() - 1;
        if k >= settings.window && history[k - settings.window] - f < settings.tol {
            converged = true;
            break;
        }
    }
    Some(DescentResult { value: f.exp(), u: x, iterations, converged })
}

/// The `t` with `Σ m_i |u_i − t|^{p−2}(u_i − t) = 0`: safeguarded Newton on
/// a strictly decreasing map, stopped at `1e-12·range(u)`.
pub(crate) fn weighted_p_shift(u: &[f64], mass: &[f64], p: f64) -> f64 {
    let (mut lo, mut hi) = u
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let range = hi - lo;
    if range == 0.0 {
        return lo;
    }
    if p == 2.0 {
        return dot(mass, u) / mass.iter().sum::<f64>();
    }
    let residual = |t: f64| {
        let (mut r, mut dr) = (0.0, 0.0);
        for (m, x) in mass.iter().zip(u) {
            let s = x - t;
            if s != 0.0 {
                let a = s.abs().powf(p - 2.0);
                r += m * a * s;
                dr += m * a;
            }
        }
        (r, -(p - 1.0) * dr)
    };
    let tol = 1e-12 * range;
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (r, dr) = residual(t);
        if r == 0.0 {
            return t;
        }
        if r > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= tol {
            break;
        }
        let newton = if dr < 0.0 { t - r / dr } else { f64::NAN };
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - t).abs() <= 0.25 * tol {
            return next;
        }
        t = next;
    }
    0.5 * (lo + hi)
}

fn two_loop(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut r: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut alpha = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * dot(s, &r);
        r.iter_mut().zip(y).for_each(|(ri, yi)| *ri -= a * yi);
        alpha.push(a);
    }
    if let Some((s, y, _)) = pairs.back() {
        let gamma = dot(s, y) / dot(y, y);
        r.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in pairs.iter().zip(alpha.iter().rev()) {
        let b = rho * dot(y, &r);
        r.iter_mut().zip(s).for_each(|(ri, si)| *ri += (a - b) * si);
    }
    r
}
