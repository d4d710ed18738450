//! JSON, CSV and SVG output for verification reports.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::anisotropy::{Anisotropy, DirectionGrid};
use crate::eigen::{DomainSpec, Scenario, VerificationReport};
use crate::error::{Error, Result};
use crate::geometry::polygon::ConvexPolygon;
use crate::geometry::svg::{header, polygon_path, Viewport};
use crate::Vec2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "svg" => Ok(Self::Svg),
            _ => Err(Error::Config(format!("unknown format `{s}` (json, csv or svg)"))),
        }
    }
}

/// Outline and both diameter chords of a domain.
#[derive(Clone, Debug)]
pub struct DomainFigure {
    pub scenario_id: String,
    pub polygon: ConvexPolygon,
    pub euclid_chord: (Vec2, Vec2),
    pub d_euclid: f64,
    pub aniso_chord: (Vec2, Vec2),
    pub d_h: f64,
}

impl DomainFigure {
    pub fn new(id: &str, poly: &ConvexPolygon, aniso: &Anisotropy, grid: &DirectionGrid) -> Result<Self> {
        let v = poly.vertices();
        let e = poly.euclidean_diameter_pair();
        let a = poly.anisotropic_diameter_pair(aniso, grid)?;
        Ok(Self {
            scenario_id: id.to_string(),
            polygon: poly.clone(),
            euclid_chord: (v[e.from], v[e.to]),
            d_euclid: e.value,
            aniso_chord: (v[a.from], v[a.to]),
            d_h: a.value,
        })
    }

    pub fn from_scenario(s: &Scenario) -> Result<Self> {
        Self::new(&s.id, &s.polygon, &s.anisotropy, &s.grid)
    }

    /// Figures for the Wulff-domain scenarios.
    pub fn for_wulff(scenarios: &[Scenario]) -> Result<Vec<Self>> {
        scenarios
            .iter()
            .filter(|s| matches!(s.domain, DomainSpec::Wulff { .. }))
            .map(Self::from_scenario)
            .collect()
    }
}

pub fn to_json(reports: &[VerificationReport]) -> Result<String> {
    serde_json::to_string_pretty(reports)
        .map(|s| s + "\n")
        .map_err(|e| Error::InvariantViolation(format!("report serialization failed: {e}")))
}

pub fn from_json(text: &str) -> Result<Vec<VerificationReport>> {
    serde_json::from_str(text).map_err(|e| Error::parse("$", e.to_string()))
}

pub fn to_csv(reports: &[VerificationReport]) -> String {
    let mut out = VerificationReport::CSV_FIELDS.join(",");
    out.push('\n');
    for r in reports {
        let row: Vec<String> = r.csv_row().into_iter().map(csv_escape).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn csv_escape(s: String) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Bar chart of `ratio` per scenario with a reference line at 1, followed by
/// one panel per figure showing the outline and both diameter chords.
pub fn to_svg(reports: &[VerificationReport], figures: &[DomainFigure]) -> String {
    let bar_h = 22.0;
    let chart_w = 640.0;
    let label_w = 260.0;
    let chart_h = 40.0 + bar_h * reports.len() as f64;
    let panel = 320.0;
    let height = chart_h + 20.0 + panel * figures.len() as f64;
    let mut out = header(chart_w, height.max(60.0));

    let max_ratio = reports.iter().map(|r| r.ratio).fold(1.0f64, f64::max) * 1.05;
    let x_of = |ratio: f64| label_w + (chart_w - label_w - 20.0) * ratio / max_ratio;
    let _ = writeln!(out, r#"<text x="10" y="20" font-size="14" font-family="sans-serif">mu_hat / sharp bound</text>"#);
    for (i, r) in reports.iter().enumerate() {
        let y = 30.0 + bar_h * i as f64;
        let colour = if r.pass { "#4a90d9" } else { "#d94a4a" };
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" font-family="sans-serif" text-anchor="end">{}</text>"#,
            label_w - 6.0,
            y + 15.0,
            escape_xml(&r.scenario_id)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{label_w:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{colour}"><title>{:.4}</title></rect>"#,
            y + 3.0,
            (x_of(r.ratio) - label_w).max(0.0),
            bar_h - 6.0,
            r.ratio
        );
    }
    let one = x_of(1.0);
    let _ = writeln!(
        out,
        r#"<line x1="{one:.1}" y1="26" x2="{one:.1}" y2="{:.1}" stroke="black" stroke-dasharray="4 3"/>"#,
        chart_h
    );

    for (k, f) in figures.iter().enumerate() {
        let top = chart_h + 20.0 + panel * k as f64;
        let view = Viewport::fit(f.polygon.vertices(), panel - 60.0);
        let _ = writeln!(out, r#"<g transform="translate(20,{:.1})">"#, top + 30.0);
        let _ = writeln!(
            out,
            r##"<path d="{}" fill="#eef3f8" stroke="#333" stroke-width="1"/>"##,
            polygon_path(&view, &f.polygon)
        );
        for (chord, colour, label) in [
            (f.euclid_chord, "#d94a4a", format!("Euclidean diameter {:.4}", f.d_euclid)),
            (f.aniso_chord, "#2a8f3c", format!("anisotropic diameter {:.4}", f.d_h)),
        ] {
            let (x1, y1) = view.map(chord.0);
            let (x2, y2) = view.map(chord.1);
            let _ = writeln!(
                out,
                r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{colour}" stroke-width="2"><title>{label}</title></line>"#
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="20" font-size="12" font-family="sans-serif">{}</text>"#,
            panel - 40.0,
            escape_xml(&f.scenario_id)
        );
        let _ = writeln!(
            out,
            r##"<text x="{:.1}" y="40" font-size="12" font-family="sans-serif" fill="#d94a4a">D_E = {:.4}</text>"##,
            panel - 40.0,
            f.d_euclid
        );
        let _ = writeln!(
            out,
            r##"<text x="{:.1}" y="58" font-size="12" font-family="sans-serif" fill="#2a8f3c">D_H = {:.4}</text>"##,
            panel - 40.0,
            f.d_h
        );
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

/// Writes `reports` to `path` in `format`; figures are used by SVG only.
pub fn emit(reports: &[VerificationReport], figures: &[DomainFigure], format: Format, path: &Path) -> Result<()> {
    let text = match format {
        Format::Json => to_json(reports)?,
        Format::Csv => to_csv(reports),
        Format::Svg => to_svg(reports, figures),
    };
    std::fs::write(path, text)?;
    Ok(())
}
