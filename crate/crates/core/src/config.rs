//! Scenario files.
//!
//! A document is a single scenario object, an array of them, or
//! `{"scenarios": [...]}`. Each scenario:
//!
//! ```json
//! {
//!   "id": "square",
//!   "domain": {"type": "polygon", "vertices": [[0,0],[1,0],[1,1],[0,1]]},
//!   "anisotropy": {"kind": "ellipse", "params": {"a": 1, "b": 2}, "rotation": 0.0},
//!   "weight": {"kind": "gaussian", "params": {"c": 1, "center": [0.5, 0.5]}},
//!   "p": 2,
//!   "mesh": {"h": 0.02},
//!   "solver": {"max_iter": 5000, "tol": 1e-9, "seeds": 5},
//!   "seed": 0
//! }
//! ```
//!
//! Wulff domains use `{"type": "wulff", "anisotropy": {...}, "R": 1, "m": 512}`.
//! Only `domain`, `anisotropy` and `p` are required.

use serde_json::{Map, Value};

use crate::anisotropy::{Anisotropy, DirectionGrid};
use crate::eigen::{DomainSpec, Scenario, SolverSettings};
use crate::error::{Error, Result};
use crate::geometry::polygon::{wulff_shape, ConvexPolygon};
use crate::geometry::weight::Weight;
use crate::Vec2;

pub const DEFAULT_WULFF_VERTICES: usize = 512;

pub fn parse_config(text: &str) -> Result<Vec<Scenario>> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| Error::parse("$", format!("invalid JSON: {e}")))?;
    let (items, prefix) = match &doc {
        Value::Array(items) => (items.clone(), "$".to_string()),
        Value::Object(map) if map.contains_key("scenarios") => {
            check_keys(map, &["scenarios"], "$")?;
            match &map["scenarios"] {
                Value::Array(items) => (items.clone(), "$.scenarios".to_string()),
                _ => return Err(Error::parse("$.scenarios", "expected an array")),
            }
        }
        Value::Object(_) => {
            return Ok(vec![parse_scenario(&doc, "$", 0)?]);
        }
        _ => return Err(Error::parse("$", "expected an object or an array")),
    };
    items
        .iter()
        .enumerate()
        .map(|(i, item)| parse_scenario(item, &format!("{prefix}[{i}]"), i))
        .collect()
}

fn check_keys(map: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<()> {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::parse(format!("{path}.{key}"), "unknown key"));
        }
    }
    Ok(())
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::parse(path, "expected an object"))
}

fn number(map: &Map<String, Value>, key: &str, path: &str) -> Result<Option<f64>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_f64()
            .filter(|x| x.is_finite())
            .map(Some)
            .ok_or_else(|| Error::parse(format!("{path}.{key}"), "expected a finite number")),
    }
}

fn required(map: &Map<String, Value>, key: &str, path: &str) -> Result<f64> {
    number(map, key, path)?.ok_or_else(|| Error::parse(format!("{path}.{key}"), "missing"))
}

fn count(map: &Map<String, Value>, key: &str, path: &str) -> Result<Option<u64>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_u64()
            .map(Some)
            .ok_or_else(|| Error::parse(format!("{path}.{key}"), "expected a non-negative integer")),
    }
}

fn point(v: &Value, path: &str) -> Result<Vec2> {
    match v.as_array().map(|a| a.as_slice()) {
        Some([x, y]) => match (x.as_f64(), y.as_f64()) {
            (Some(x), Some(y)) if x.is_finite() && y.is_finite() => Ok(Vec2::new(x, y)),
            _ => Err(Error::parse(path, "expected two finite numbers")),
        },
        _ => Err(Error::parse(path, "expected an [x, y] pair")),
    }
}

/// Parses `{"kind", "params", "rotation"}` into an anisotropy.
pub fn parse_anisotropy(v: &Value, path: &str) -> Result<Anisotropy> {
    let map = object(v, path)?;
    check_keys(map, &["kind", "params", "rotation"], path)?;
    let kind = map
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::parse(format!("{path}.kind"), "missing or not a string"))?;
    let empty = Map::new();
    let ppath = format!("{path}.params");
    let params = match map.get("params") {
        Some(p) => object(p, &ppath)?,
        None => &empty,
    };
    let wrap = |r: Result<Anisotropy>| r.map_err(|e| Error::parse(&ppath, e.to_string()));
    let aniso = match kind {
        "euclidean" => {
            check_keys(params, &[], &ppath)?;
            Anisotropy::euclidean()
        }
        "ellipse" => {
            check_keys(params, &["a", "b"], &ppath)?;
            wrap(Anisotropy::ellipse(required(params, "a", &ppath)?, required(params, "b", &ppath)?))?
        }
        "lq_norm" => {
            check_keys(params, &["q"], &ppath)?;
            wrap(Anisotropy::lq_norm(required(params, "q", &ppath)?))?
        }
        "half_space_gauge" => {
            check_keys(params, &["c"], &ppath)?;
            wrap(Anisotropy::half_space_gauge(required(params, "c", &ppath)?))?
        }
        "custom_sampled" => {
            check_keys(params, &["values"], &ppath)?;
            let vpath = format!("{ppath}.values");
            let values = params
                .get("values")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::parse(&vpath, "expected an array of numbers"))?
                .iter()
                .enumerate()
                .map(|(i, x)| x.as_f64().ok_or_else(|| Error::parse(format!("{vpath}[{i}]"), "expected a number")))
                .collect::<Result<Vec<_>>>()?;
            wrap(Anisotropy::custom_sampled(values))?
        }
        other => return Err(Error::parse(format!("{path}.kind"), format!("unknown anisotropy kind `{other}`"))),
    };
    Ok(match number(map, "rotation", path)? {
        Some(angle) => aniso.rotate(angle),
        None => aniso,
    })
}

fn parse_weight(v: &Value, path: &str) -> Result<Weight> {
    let map = object(v, path)?;
    check_keys(map, &["kind", "params"], path)?;
    let kind = map
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::parse(format!("{path}.kind"), "missing or not a string"))?;
    let empty = Map::new();
    let ppath = format!("{path}.params");
    let params = match map.get("params") {
        Some(p) => object(p, &ppath)?,
        None => &empty,
    };
    let wrap = |r: Result<Weight>| r.map_err(|e| Error::parse(&ppath, e.to_string()));
    match kind {
        "constant" => {
            check_keys(params, &["value"], &ppath)?;
            wrap(Weight::constant(number(params, "value", &ppath)?.unwrap_or(1.0)))
        }
        "exp_linear" => {
            check_keys(params, &["c"], &ppath)?;
            let c = params.get("c").ok_or_else(|| Error::parse(format!("{ppath}.c"), "missing"))?;
            wrap(Weight::exp_linear(point(c, &format!("{ppath}.c"))?))
        }
        "gaussian" => {
            check_keys(params, &["c", "center"], &ppath)?;
            let center = match params.get("center") {
                Some(v) => point(v, &format!("{ppath}.center"))?,
                None => Vec2::zeros(),
            };
            wrap(Weight::gaussian(required(params, "c", &ppath)?, center))
        }
        other => Err(Error::parse(format!("{path}.kind"), format!("unknown weight kind `{other}`"))),
    }
}

fn parse_domain(v: &Value, path: &str, grid: &DirectionGrid) -> Result<(ConvexPolygon, DomainSpec)> {
    let map = object(v, path)?;
    let kind = map
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::parse(format!("{path}.type"), "missing or not a string"))?;
    match kind {
        "polygon" => {
            check_keys(map, &["type", "vertices"], path)?;
            let vpath = format!("{path}.vertices");
            let vertices = map
                .get("vertices")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::parse(&vpath, "expected an array of [x, y] pairs"))?
                .iter()
                .enumerate()
                .map(|(i, p)| point(p, &format!("{vpath}[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            let poly = ConvexPolygon::new(vertices).map_err(|e| Error::parse(&vpath, e.to_string()))?;
            Ok((poly, DomainSpec::Polygon))
        }
        "wulff" => {
            check_keys(map, &["type", "anisotropy", "R", "m"], path)?;
            let apath = format!("{path}.anisotropy");
            let aniso = parse_anisotropy(
                map.get("anisotropy").ok_or_else(|| Error::parse(&apath, "missing"))?,
                &apath,
            )?;
            let radius = number(map, "R", path)?.unwrap_or(1.0);
            let m = count(map, "m", path)?.unwrap_or(DEFAULT_WULFF_VERTICES as u64) as usize;
            let poly = wulff_shape(&aniso, radius, m, grid).map_err(|e| Error::parse(path, e.to_string()))?;
            Ok((poly, DomainSpec::Wulff { anisotropy: aniso, radius, m }))
        }
        other => Err(Error::parse(format!("{path}.type"), format!("unknown domain type `{other}`"))),
    }
}

fn parse_scenario(v: &Value, path: &str, index: usize) -> Result<Scenario> {
    let map = object(v, path)?;
    check_keys(
        map,
        &["id", "domain", "anisotropy", "weight", "p", "mesh", "solver", "seed"],
        path,
    )?;
    let id = match map.get("id") {
        None => format!("scenario-{index}"),
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(Error::parse(format!("{path}.id"), "expected a string")),
    };
    let grid = DirectionGrid::default();
    let dpath = format!("{path}.domain");
    let (polygon, domain) =
        parse_domain(map.get("domain").ok_or_else(|| Error::parse(&dpath, "missing"))?, &dpath, &grid)?;
    let apath = format!("{path}.anisotropy");
    let anisotropy =
        parse_anisotropy(map.get("anisotropy").ok_or_else(|| Error::parse(&apath, "missing"))?, &apath)?;
    let weight = match map.get("weight") {
        Some(w) => parse_weight(w, &format!("{path}.weight"))?,
        None => Weight::default(),
    };
    let p = required(map, "p", path)?;
    if !(p > 1.0) {
        return Err(Error::Domain(format!("{path}.p: exponent must satisfy 1 < p < ∞, got {p}")));
    }

    let mut solver = SolverSettings::default();
    if let Some(s) = map.get("solver") {
        let spath = format!("{path}.solver");
        let s = object(s, &spath)?;
        check_keys(s, &["max_iter", "tol", "seeds"], &spath)?;
        if let Some(n) = count(s, "max_iter", &spath)? {
            solver.max_iter = n as usize;
        }
        if let Some(t) = number(s, "tol", &spath)? {
            solver.tol = t;
        }
        if let Some(n) = count(s, "seeds", &spath)? {
            solver.starts = n as usize;
        }
    }
    let mut h = None;
    if let Some(m) = map.get("mesh") {
        let mpath = format!("{path}.mesh");
        let m = object(m, &mpath)?;
        check_keys(m, &["h"], &mpath)?;
        h = number(m, "h", &mpath)?;
    }
    let seed = count(map, "seed", path)?.unwrap_or(0);

    let mut scenario = Scenario::new(id, polygon, anisotropy, weight, p)
        .map_err(|e| Error::parse(path, e.to_string()))?
        .with_domain(domain)
        .with_seed(seed)
        .with_solver(solver)
        .map_err(|e| Error::parse(format!("{path}.solver"), e.to_string()))?;
    if let Some(h) = h {
        scenario = scenario.with_h(h).map_err(|e| Error::parse(format!("{path}.mesh.h"), e.to_string()))?;
    }
    Ok(scenario)
}
