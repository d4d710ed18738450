use super::field::{basis_gradients, Field2D};
use super::mesh::TriMesh;
use crate::anisotropy::Anisotropy;
use crate::error::{Error, Result};
use crate::geometry::weight::Weight;
use crate::optimize::{weighted_p_shift, ShiftInvariantQuotient};
use crate::Vec2;

/// `Σ_T |T| ω(c_T) H(∇u|_T)^p / Σ_v m_v ω(v) |u_v − t|^p` with
/// `m_v = Σ_{T∋v} |T|/3`.
#[derive(Clone)]
pub struct RayleighNd {
    p: f64,
    aniso: Anisotropy,
    smoothing: f64,
    triangles: Vec<[usize; 3]>,
    basis: Vec<[Vec2; 3]>,
    tri_weight: Vec<f64>,
    mass: Vec<f64>,
}

impl RayleighNd {
    /// `smoothing` only affects the half-space gauge (see
    /// [`Anisotropy::value_and_gradient`]); zero gives the exact gauge.
    pub fn new(mesh: &TriMesh, aniso: &Anisotropy, weight: &Weight, p: f64, smoothing: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::Domain(format!("exponent must satisfy 1 < p < ∞, got {p}")));
        }
        let basis = (0..mesh.triangles().len())
            .map(|t| basis_gradients(mesh, t))
            .collect::<Result<Vec<_>>>()?;
        let tri_weight = (0..mesh.triangles().len())
            .map(|t| {
                let c = mesh.corners(t).iter().sum::<Vec2>() / 3.0;
                mesh.triangle_area(t) * weight.eval(c)
            })
            .collect();
        let mass = mesh
            .lumped_areas()
            .iter()
            .zip(mesh.points())
            .map(|(m, x)| m * weight.eval(*x))
            .collect();
        Ok(Self {
            p,
            aniso: aniso.clone(),
            smoothing,
            triangles: mesh.triangles().to_vec(),
            basis,
            tri_weight,
            mass,
        })
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn with_smoothing(&self, smoothing: f64) -> Self {
        Self { smoothing, ..self.clone() }
    }

    fn gradient(&self, t: usize, u: &[f64]) -> Vec2 {
        let tri = &self.triangles[t];
        let b = &self.basis[t];
        b[0] * u[tri[0]] + b[1] * u[tri[1]] + b[2] * u[tri[2]]
    }
}

impl ShiftInvariantQuotient for RayleighNd {
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
            Some(out) => {
                out.iter_mut().for_each(|v| *v = 0.0);
                for t in 0..self.triangles.len() {
                    let g = self.gradient(t, u);
                    let (h, dh) = self.aniso.value_and_gradient(g, self.smoothing);
                    if h <= 0.0 {
                        continue;
                    }
                    let hp1 = h.powf(p - 1.0);
                    total += self.tri_weight[t] * hp1 * h;
                    let coef = self.tri_weight[t] * p * hp1;
                    for k in 0..3 {
                        out[self.triangles[t][k]] += coef * dh.dot(&self.basis[t][k]);
                    }
                }
            }
            None => {
                for t in 0..self.triangles.len() {
                    let g = self.gradient(t, u);
                    let h = if self.smoothing > 0.0 {
                        self.aniso.value_and_gradient(g, self.smoothing).0
                    } else {
                        self.aniso.value(g)
                    };
                    total += self.tri_weight[t] * h.powf(p);
                }
            }
        }
        total
    }

    fn denominator(&self, w: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let p = self.p;
        let mut total = 0.0;
        match grad {
            Some(out) => {
                for ((o, m), x) in out.iter_mut().zip(&self.mass).zip(w) {
                    let a = x.abs().powf(p - 1.0);
                    total += m * a * x.abs();
                    *o = m * p * a.copysign(*x);
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

/// The `t` with `Σ_v m_v ω(v) |u_v − t|^{p−2}(u_v − t) = 0`.
pub fn constraint_shift_nd(field: &Field2D, weight: &Weight, p: f64) -> Result<f64> {
    let q = RayleighNd::new(field.mesh(), &Anisotropy::euclidean(), weight, p, 0.0)?;
    Ok(q.shift(field.values()))
}

/// The discrete quotient of `field` after the constraint shift, with the exact gauge.
pub fn rayleigh_nd(field: &Field2D, aniso: &Anisotropy, weight: &Weight, p: f64) -> Result<f64> {
    RayleighNd::new(field.mesh(), aniso, weight, p, 0.0)?
        .quotient(field.values())
        .ok_or_else(|| Error::Degenerate("field is constant after the constraint shift".into()))
}
