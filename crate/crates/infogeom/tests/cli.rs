use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

fn infogeom(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_infogeom"));
    cmd.args(args).env_remove("INFOGEOM_OUT_DIR");
    if let Some(d) = out_dir {
        cmd.env("INFOGEOM_OUT_DIR", d);
    }
    cmd.output().expect("binary runs")
}

fn spec(dir: &Path, name: &str, json: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p.display().to_string()
}

fn length(out: &Output) -> f64 {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    v["length"].as_f64().unwrap()
}

#[test]
fn distance_paths_on_the_normal_family() {
    let dir = tempfile::tempdir().unwrap();
    let m = spec(dir.path(), "normal.json", r#"{"family": "normal"}"#);
    let run = |path: &str| infogeom(&["distance", "--model", &m, "--from", "0,1", "--to", "2,1.4142135623730951", "--path", path], None);
    assert!((length(&run("line")) - 1.744).abs() < 1e-3);
    assert!((length(&run("circle")) - 1.697).abs() < 1e-3);
    assert!((length(&run("geodesic")) - 1.656).abs() < 1e-3);
}

#[test]
fn identical_endpoints_have_zero_distance() {
    let dir = tempfile::tempdir().unwrap();
    let m = spec(dir.path(), "normal.json", r#"{"family": "normal"}"#);
    let out = infogeom(&["distance", "--model", &m, "--from", "-1,2", "--to", "-1,2", "--path", "line"], None);
    assert_eq!(length(&out), 0.0);
}

#[test]
fn distance_writes_manifest_into_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let m = spec(dir.path(), "normal.json", r#"{"family": "normal"}"#);
    let out = infogeom(&["distance", "--model", &m, "--from", "0,1", "--to", "1,1"], Some(dir.path()));
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("distance.json")).unwrap()).unwrap();
    assert_eq!(v["manifest"]["command"], "distance");
    assert_eq!(v["manifest"]["model_spec"], m.as_str());
    assert_eq!(v["path"], "geodesic");
}

#[test]
fn spec_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = spec(dir.path(), "bad.json", r#"{"family": "weibull"}"#);
    let out = infogeom(&["distance", "--model", &bad, "--from", "0,1", "--to", "1,1"], None);
    assert_eq!(out.status.code(), Some(2));
    let missing = dir.path().join("nope.json").display().to_string();
    let out = infogeom(&["distance", "--model", &missing, "--from", "0,1", "--to", "1,1"], None);
    assert_eq!(out.status.code(), Some(2));
    let m = spec(dir.path(), "normal.json", r#"{"family": "normal"}"#);
    let out = infogeom(&["distance", "--model", &m, "--from", "0,-1", "--to", "1,1"], None);
    assert_eq!(out.status.code(), Some(2));
    let out = infogeom(&["reproduce", "table9"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_smoke_run_is_fast_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let m = spec(dir.path(), "cfa.json", r#"{"family": "cfa3", "n": 30}"#);
    let a = dir.path().join("run1.json");
    let b = dir.path().join("run2.json");
    let start = Instant::now();
    for p in [&a, &b] {
        let out = infogeom(
            &["simulate", "--model", &m, "--theta", "1,1,1", "--replicates", "2", "--seed", "5", "--out", &p.display().to_string()],
            None,
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert!(start.elapsed().as_secs_f64() < 10.0);
    let (ta, tb) = (fs::read_to_string(&a).unwrap(), fs::read_to_string(&b).unwrap());
    // the manifests differ only in the output path
    assert_eq!(ta.replace("run1.json", "X"), tb.replace("run2.json", "X"));
    let v: serde_json::Value = serde_json::from_str(&ta).unwrap();
    assert_eq!(v["summary"]["replicates"], 2);
    assert_eq!(v["manifest"]["seed"], 5);
}

#[test]
fn simulate_same_output_path_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let m = spec(dir.path(), "cfa.json", r#"{"family": "cfa3", "n": 30}"#);
    let p = dir.path().join("s.json").display().to_string();
    let run = || {
        let out = infogeom(&["simulate", "--model", &m, "--theta", "2,2,1", "--replicates", "3", "--out", &p], None);
        assert!(out.status.success());
        fs::read(&p).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn simulate_rejects_flat_families() {
    let dir = tempfile::tempdir().unwrap();
    let m = spec(dir.path(), "normal.json", r#"{"family": "normal"}"#);
    let out = infogeom(&["simulate", "--model", &m, "--theta", "0,1", "--replicates", "2"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ability_grid_csv_has_manifest_and_limit() {
    let dir = tempfile::tempdir().unwrap();
    let m = spec(dir.path(), "rasch.json", r#"{"family": "rasch", "difficulties": [0, 0, 0, 0, 0]}"#);
    let out = infogeom(&["ability-grid", "--model", &m, "--from", "-40", "--to", "40", "--step", "10"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# command: ability-grid\n"));
    let last = text.lines().last().unwrap();
    let cols: Vec<f64> = last.split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(cols[0], 40.0);
    assert!((cols[1] - std::f64::consts::PI * 5f64.sqrt()).abs() < 1e-6);
}

#[test]
fn reproduce_writes_artifacts_and_reports_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = infogeom(&["reproduce", "cfa-curvature", "--out", &dir.path().display().to_string()], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).lines().all(|l| l.starts_with("PASS")));
    let csv = fs::read_to_string(dir.path().join("cfa-curvature.csv")).unwrap();
    assert!(csv.starts_with("# command: reproduce cfa-curvature\n"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("cfa-curvature-checks.json")).unwrap()).unwrap();
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn failing_locked_checks_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = infogeom(&["reproduce", "table1", "--out", &dir.path().display().to_string()], None);
    // the two isotropic rows do not match the published values
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("FAIL")).count(), 2);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 8);
}
