use std::fmt::Write as _;
use std::sync::Arc;

use super::mesh::TriMesh;
use crate::error::{Error, Result};
use crate::geometry::svg::{header, Viewport};
use crate::Vec2;

/// Continuous piecewise-linear field given by nodal values.
#[derive(Clone, Debug)]
pub struct Field2D {
    mesh: Arc<TriMesh>,
    values: Vec<f64>,
}

impl Field2D {
    pub fn new(mesh: Arc<TriMesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.points().len() {
            return Err(Error::InvalidInput(format!(
                "{} values for {} mesh nodes",
                values.len(),
                mesh.points().len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("field values must be finite".into()));
        }
        Ok(Self { mesh, values })
    }

    pub fn from_fn(mesh: Arc<TriMesh>, f: impl Fn(Vec2) -> f64) -> Result<Self> {
        let values = mesh.points().iter().map(|p| f(*p)).collect();
        Self::new(mesh, values)
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `x,y,u` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,u\n");
        for (p, u) in self.mesh.points().iter().zip(&self.values) {
            let _ = writeln!(out, "{},{},{}", p.x, p.y, u);
        }
        out
    }

    /// Triangles filled by their mean nodal value on a blue–white–red scale
    /// symmetric about zero.
    pub fn to_svg(&self) -> String {
        let view = Viewport::fit(self.mesh.points(), 480.0);
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut out = header(view.size(), view.size());
        for (t, tri) in self.mesh.triangles().iter().enumerate() {
            let mean = tri.iter().map(|&i| self.values[i]).sum::<f64>() / 3.0 / scale;
            let pts: Vec<String> = self
                .mesh
                .corners(t)
                .iter()
                .map(|p| {
                    let (x, y) = view.map(*p);
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            let _ = writeln!(
                out,
                r#"<polygon points="{}" fill="{}" stroke="none"/>"#,
                pts.join(" "),
                diverging(mean)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn diverging(s: f64) -> String {
    let s = s.clamp(-1.0, 1.0);
    let fade = |x: f64| (255.0 * (1.0 - x.abs())).round() as u8;
    if s >= 0.0 {
        format!("#ff{:02x}{:02x}", fade(s), fade(s))
    } else {
        format!("#{:02x}{:02x}ff", fade(s), fade(s))
    }
}

/// Gradients of the three barycentric basis functions on triangle `t`.
pub(crate) fn basis_gradients(mesh: &TriMesh, t: usize) -> Result<[Vec2; 3]> {
    let [a, b, c] = mesh.corners(t);
    let twice = (b - a).perp(&(c - a));
    let scale = (b - a).norm_squared().max((c - a).norm_squared());
    if !(twice > 1e-14 * scale) {
        return Err(Error::InvariantViolation(format!("triangle {t} is degenerate")));
    }
    let rot = |e: Vec2| Vec2::new(-e.y, e.x) / twice;
    Ok([rot(c - b), rot(a - c), rot(b - a)])
}

/// The constant gradient of the field on each triangle.
pub fn gradient_pw(field: &Field2D) -> Result<Vec<Vec2>> {
    let mesh = &field.mesh;
    (0..mesh.triangles().len())
        .map(|t| {
            let g = basis_gradients(mesh, t)?;
            let tri = mesh.triangles()[t];
            Ok((0..3).map(|k| g[k] * field.values[tri[k]]).sum())
        })
        .collect()
}
