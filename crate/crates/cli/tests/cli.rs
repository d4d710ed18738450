use std::path::Path;
use std::process::{Command, Output};

const ELLIPSE: &str = r#"{"kind":"ellipse","params":{"a":1,"b":2}}"#;

fn poincare(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poincare")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SQUARE: &str = r#"{
  "id": "square",
  "domain": {"type": "polygon", "vertices": [[0,0],[1,0],[1,1],[0,1]]},
  "anisotropy": {"kind": "euclidean"},
  "weight": {"kind": "constant"},
  "p": 2,
  "mesh": {"h": 0.05},
  "solver": {"seeds": 2}
}"#;

fn field(line: &str, name: &str) -> f64 {
    line.strip_prefix(name)
        .unwrap_or_else(|| panic!("`{line}` does not start with {name}"))
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn pi_p_prints_agreeing_values() {
    let o = poincare(&["pi-p", "--p", "2"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let closed = out.lines().find(|l| l.starts_with("closed")).unwrap();
    assert!((field(closed, "closed") - std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn polar_matches_closed_form() {
    let o = poincare(&["polar", "--anisotropy", ELLIPSE, "--eta", "0,1", "--eta", "3,4"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<Vec<&str>> = out.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        let grid: f64 = r[3].parse().unwrap();
        let closed: f64 = r[4].parse().unwrap();
        assert!((grid - closed).abs() < 1e-9);
    }
    assert!((rows[0][3].parse::<f64>().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn wulff_writes_polygon_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.json");
    let o = poincare(&["wulff", "--anisotropy", ELLIPSE, "--m", "64", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    let text = v.to_string();
    assert!(text.contains('['));
}

#[test]
fn diameter_of_the_example() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "w.json",
        &format!(r#"{{"domain": {{"type": "wulff", "anisotropy": {ELLIPSE}}}, "anisotropy": {ELLIPSE}, "p": 2}}"#),
    );
    let o = poincare(&["diameter", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let row: Vec<f64> = out.lines().nth(1).unwrap().split(',').skip(1).map(|x| x.parse().unwrap()).collect();
    assert!((row[0] - 4.0).abs() < 1e-3);
    assert!((row[1] - 2.0).abs() < 1e-3);
    assert!((row[2] - 1.0).abs() < 1e-9);
}

#[test]
fn example_paper_reports_the_example() {
    let o = poincare(&["example-paper"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let get = |name: &str| field(out.lines().find(|l| l.starts_with(name)).unwrap(), name);
    assert!((get("d_euclid") - 4.0).abs() < 1e-3);
    assert!((get("d_h") - 2.0).abs() < 1e-3);
    assert!(get("ratio") >= 0.98);
    assert!(out.contains("pass            true"));
}

#[test]
fn verify_is_deterministic_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "s.json", SQUARE);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (out, jobs) in [(&a, "1"), (&b, "2")] {
        let o = poincare(&["verify", "--config", &cfg, "--out", out.to_str().unwrap(), "--jobs", jobs]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ta = std::fs::read(&a).unwrap();
    assert_eq!(ta, std::fs::read(&b).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(v[0]["scenario_id"], "square");
    assert_eq!(v[0]["pass"], true);
}

#[test]
fn verify_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "s.json", SQUARE);
    let o = poincare(&["verify", "--config", &cfg, "--format", "csv"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("scenario_id,mu_hat,"));
    assert_eq!(out.lines().count(), 2);

    let svg = dir.path().join("r.svg");
    let o = poincare(&["verify", "--config", &cfg, "--out", svg.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(svg).unwrap().starts_with("<svg"));
}

#[test]
fn seed_flag_reaches_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "s.json", SQUARE);
    let o = poincare(&["verify", "--config", &cfg, "--seed", "7"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["seed"], 7);
}

#[test]
fn solve_commands_write_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "s.json", SQUARE);
    let f = dir.path().join("u.csv");
    let o = poincare(&["solve-2d", "--config", &cfg, "--out", f.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(std::fs::read_to_string(&f).unwrap().starts_with("x,y,u\n"));

    let prof = dir.path().join("p.csv");
    let o = poincare(&["solve-1d", "--p", "2", "--n", "200", "--out", prof.to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    let ratio = field(out.lines().find(|l| l.starts_with("ratio")).unwrap(), "ratio");
    assert!((ratio - 1.0).abs() < 1e-3, "{ratio}");
    assert_eq!(std::fs::read_to_string(prof).unwrap().lines().count(), 201);
}

#[test]
fn slice_reports_pieces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "s.json", SQUARE);
    let o = poincare(&["slice", "--config", &cfg, "--eps", "0.1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(!v.as_array().unwrap().is_empty());
}

#[test]
fn bad_input_exits_with_two() {
    let o = poincare(&["pi-p", "--p", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "bad.json", &SQUARE.replace("\"p\": 2", "\"p\": 0.5"));
    let o = poincare(&["verify", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("$.p"));

    let o = poincare(&["diameter"]);
    assert_eq!(o.status.code(), Some(2));
}
