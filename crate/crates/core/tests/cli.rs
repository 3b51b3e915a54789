use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sandwich(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sandwich"))
        .args(args)
        .output()
        .expect("the binary runs")
}

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
        .display()
        .to_string()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A small CIR model with `N` steps and `paths` paths.
fn small_cir(dir: &Path, n: usize, paths: usize) -> String {
    let body = format!(
        r#"{{
  "drift": {{"family": "cir", "kappa1": 1, "kappa2": 1, "gamma": 1}},
  "bounds": {{"phi": {{"kind": "const", "value": 0}}}},
  "noise": {{"kind": "fbm", "H": 0.7}},
  "y0": 1, "T": 1, "N": {n},
  "run": {{"seed": 3, "paths": {paths}}}
}}"#
    );
    write_config(dir, "small.json", &body)
}

fn read_dir_sorted(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            let bytes = fs::read(&p).unwrap();
            (PathBuf::from(p.file_name().unwrap()), bytes)
        })
        .collect();
    v.sort();
    v
}

#[test]
fn validate_accepts_the_shipped_configs() {
    for name in ["fig1.json", "fig2.json", "fig3.json", "study_cir.json", "study_tsb.json"] {
        let o = sandwich(&["validate", "--config", &config(name)]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}{}", stdout(&o), stderr(&o));
        assert!(stdout(&o).contains("max mesh"));
    }
}

#[test]
fn validate_reports_a_failed_assumption() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "weak.json",
        r#"{
  "drift": {"family": "cir", "kappa1": 1, "kappa2": 1, "gamma": 0.3},
  "bounds": {"phi": {"kind": "const", "value": 0}, "lambda": 0.7},
  "noise": {"kind": "fbm", "H": 0.8},
  "y0": 1, "T": 1, "N": 1000
}"#,
    );
    let o = sandwich(&["validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let failing: Vec<_> = stdout(&o).lines().filter(|l| l.contains("FAIL")).map(String::from).collect();
    assert!(failing.iter().any(|l| l.contains("A3")), "{failing:?}");

    let o = sandwich(&["validate", "--config", &cfg, "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["all_pass"], false);
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.json", "{ \"drift\": ");
    let o = sandwich(&["validate", "--config", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error"));

    let unknown = write_config(
        dir.path(),
        "unknown.json",
        r#"{"drift": {"family": "cir", "kappa1": 1, "kappa2": 1, "gamma": 1, "kappa9": 1},
            "bounds": {"phi": {"kind": "const", "value": 0}},
            "noise": {"kind": "brownian"}, "y0": 1, "T": 1, "N": 10}"#,
    );
    assert_eq!(sandwich(&["validate", "--config", &unknown]).status.code(), Some(2));
    assert_eq!(sandwich(&["validate"]).status.code(), Some(2));
    assert_eq!(sandwich(&["simulate", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(sandwich(&[]).status.code(), Some(2));
}

#[test]
fn simulate_is_deterministic_and_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_cir(dir.path(), 500, 3);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = sandwich(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let (fa, fb) = (read_dir_sorted(&a), read_dir_sorted(&b));
    let names: Vec<_> = fa.iter().map(|(p, _)| p.display().to_string()).collect();
    assert_eq!(names, ["manifest.json", "path_3.csv", "path_4.csv", "path_5.csv"]);
    for ((na, ba), (_, bb)) in fa.iter().zip(&fb) {
        if na.ends_with("manifest.json") {
            continue;
        }
        assert_eq!(ba, bb, "{} differs between runs", na.display());
    }

    let csv = fs::read_to_string(a.join("path_3.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,y"));
    assert_eq!(lines.count(), 501);

    let m: serde_json::Value = serde_json::from_slice(&fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["all_strict"], true);
    assert_eq!(m["stepper"], serde_json::json!("closed_form_cir"));
    let paths = m["paths"].as_array().unwrap();
    assert_eq!(paths.len(), 3);
    for (i, p) in paths.iter().enumerate() {
        assert_eq!(p["seed"], 3 + i as u64);
        assert!(p["min"].as_f64().unwrap() > 0.0);
        assert!(p["max_residual"].as_f64().unwrap() <= 1e-10 * 10.0);
    }
    assert_eq!(m["config"]["N"], 500);
}

#[test]
fn simulate_refuses_a_coarse_mesh_unless_told_otherwise() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "coarse.json",
        r#"{
  "drift": {"family": "cir", "kappa1": 5, "kappa2": 1, "gamma": 1},
  "bounds": {"phi": {"kind": "const", "value": 0}},
  "noise": {"kind": "fbm", "H": 0.7},
  "y0": 0.05, "T": 1, "N": 2
}"#,
    );
    let out = dir.path().join("o");
    let o = sandwich(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("mesh"), "{}", stderr(&o));
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn noise_dump_from_flags() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, seed: &str| {
        let out = dir.path().join(sub);
        let o = sandwich(&[
            "noise", "--kind", "brownian", "--steps", "4", "--seed", seed, "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        fs::read_to_string(out.join("noise.csv")).unwrap()
    };
    let a = run("a", "9");
    let lines: Vec<_> = a.lines().collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[0], "t,z");
    assert!(lines[1].starts_with("0,0") || lines[1].starts_with("0.0,0.0"), "{}", lines[1]);
    assert_eq!(a, run("b", "9"));
    assert_ne!(a, run("c", "10"));
}

#[test]
fn constant_hurst_mbm_has_the_fbm_covariance() {
    let dir = tempfile::tempdir().unwrap();
    let cov = |kind: &str| {
        let out = dir.path().join(kind);
        let o = sandwich(&[
            "noise", "--kind", kind, "--hurst", "0.7", "--steps", "16", "--cov", "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        fs::read_to_string(out.join("covariance.csv")).unwrap()
    };
    let (m, f) = (cov("mbm"), cov("fbm"));
    assert_eq!(m.lines().count(), 17);
    assert_eq!(m, f);
}

#[test]
fn noise_needs_a_hurst_index() {
    let dir = tempfile::tempdir().unwrap();
    let o = sandwich(&["noise", "--kind", "fbm", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn convergence_with_one_path_has_no_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_cir(dir.path(), 100, 1);
    let out = dir.path().join("o");
    let o = sandwich(&[
        "convergence", "--config", &cfg, "--meshes", "16,32", "--ref", "256", "--paths", "1", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("unavailable"), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert!(v["report"]["slope_stderr"].is_null());
    assert_eq!(v["report"]["paths"], 1);
    let csv = fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(out.join("loglog.csv").exists());
}

#[test]
fn convergence_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_cir(dir.path(), 100, 1);
    let report = |sub: &str| {
        let out = dir.path().join(sub);
        let o = sandwich(&[
            "convergence", "--config", &cfg, "--meshes", "16,32,64", "--ref", "512", "--paths", "8", "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let mut v: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("wall_seconds");
        v
    };
    assert_eq!(report("a"), report("b"));
}

#[test]
fn convergence_names_a_mesh_that_does_not_divide_the_reference() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_cir(dir.path(), 100, 1);
    let o = sandwich(&[
        "convergence", "--config", &cfg, "--meshes", "16,48", "--ref", "512", "--paths", "2", "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("48"), "{}", stderr(&o));
}
