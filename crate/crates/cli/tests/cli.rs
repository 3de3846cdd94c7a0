use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use invasionlab::io::{read_csv, read_snapshot, RunManifest};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_invasionlab"));
    c.env_remove("INVASIONLAB_OUT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn small(init: &str, t_end: f64, events: &str) -> String {
    format!(
        r#"{{
  "params": {{"a": 0.1, "gamma": 2.0, "eps": 0.01}},
  "grid": {{"x_min": -50.0, "x_max": 50.0, "n": 1001}},
  "scheme": {{"dt": 0.02, "frame_speed": 0.0, "bc": "neumann", "record_every": 250, "t_end": {t_end}}},
  "init": {init},
  "events": {events}
}}"#
    )
}

const BUMP: &str = r#"{"kind": "bump", "center": -45.0, "width": 3.0, "amplitude": 0.5}"#;

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn negative_dt_exits_2_naming_the_field() {
    let d = tempfile::tempdir().unwrap();
    let cfg = config(d.path(), "bad.json", &small(BUMP, 10.0, "[]").replace("\"dt\": 0.02", "\"dt\": -0.02"));
    let out = run(&["simulate", "--config", s(&cfg), "--out", s(&d.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("scheme.dt"));
}

#[test]
fn unknown_key_exits_2() {
    let d = tempfile::tempdir().unwrap();
    let cfg = config(d.path(), "bad.json", &small(BUMP, 10.0, "[]").replace("\"record_every\"", "\"record_evry\""));
    let out = run(&["simulate", "--config", s(&cfg), "--out", s(&d.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("scheme"));
}

#[test]
fn zero_initial_data_gives_zero_snapshots() {
    let d = tempfile::tempdir().unwrap();
    let cfg = config(d.path(), "zero.json", &small(r#"{"kind": "zero"}"#, 20.0, "[]"));
    let o = d.path().join("o");
    assert!(run(&["simulate", "--config", s(&cfg), "--out", s(&o)]).status.success());
    let m = RunManifest::load(&o).unwrap();
    assert_eq!(m.snapshots.len(), 5);
    for st in m.load_snapshots(&o).unwrap() {
        assert!(st.u.iter().chain(&st.w).all(|&v| v == 0.0));
    }
}

#[test]
fn bump_run_has_monotone_front_and_analyze_records_failures() {
    let d = tempfile::tempdir().unwrap();
    let cfg = config(d.path(), "bump.json", &small(BUMP, 60.0, "[]"));
    let o = d.path().join("o");
    assert!(run(&["simulate", "--config", s(&cfg), "--out", s(&o)]).status.success());
    let (head, rows) = read_csv(&o.join("front.csv")).unwrap();
    assert_eq!(head, ["t", "position", "lab_position"]);
    assert!(rows.len() >= 10);
    assert!(rows.windows(2).all(|w| w[1][1] > w[0][1]), "{rows:?}");

    // too short for a converged front: reported, not fatal
    let a = d.path().join("a");
    let out = run(&["analyze", s(&o), "--out", s(&a)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: Value = serde_json::from_slice(&std::fs::read(a.join("summary.json")).unwrap()).unwrap();
    let stages: Vec<&str> =
        summary["failures"].as_array().unwrap().iter().map(|f| f["stage"].as_str().unwrap()).collect();
    assert!(stages.contains(&"front") && stages.contains(&"spectrum"), "{stages:?}");

    // corrupting a snapshot fails the manifest check
    let snap = o.join("snapshots/snap_00003.bin");
    let mut bytes = std::fs::read(&snap).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 1;
    std::fs::write(&snap, &bytes).unwrap();
    assert_eq!(run(&["analyze", s(&o), "--out", s(&a)]).status.code(), Some(4));
    std::fs::remove_file(&snap).unwrap();
    assert_eq!(run(&["analyze", s(&o), "--out", s(&a)]).status.code(), Some(4));
    assert_eq!(run(&["report", s(&d.path().join("nowhere")), "--out", s(&a)]).status.code(), Some(4));
}

#[test]
fn fixed_seed_reruns_are_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    let noise = r#"{"kind": "noise", "amplitude": 0.05, "seed": 11, "window": [-50.0, -40.0]}"#;
    let cfg = config(d.path(), "noise.json", &small(noise, 10.0, "[]"));
    let dirs: Vec<PathBuf> = ["a", "b"].iter().map(|n| d.path().join(n)).collect();
    for o in &dirs {
        assert!(run(&["simulate", "--config", s(&cfg), "--out", s(o), "--seed", "99"]).status.success());
    }
    let ma = RunManifest::load(&dirs[0]).unwrap();
    let mb = RunManifest::load(&dirs[1]).unwrap();
    assert_eq!(ma.files, mb.files);
    for f in &ma.files {
        assert_eq!(std::fs::read(dirs[0].join(&f.path)).unwrap(), std::fs::read(dirs[1].join(&f.path)).unwrap());
    }
    // the seed flag overrides the config seed
    let c = d.path().join("c");
    assert!(run(&["simulate", "--config", s(&cfg), "--out", s(&c)]).status.success());
    let first = |dir: &Path| read_snapshot(&dir.join("snapshots/snap_00000.bin")).unwrap().u;
    assert_ne!(first(&dirs[0]), first(&c));
}

#[test]
fn output_root_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let cfg = config(d.path(), "envrun.json", &small(r#"{"kind": "zero"}"#, 5.0, "[]"));
    let root = d.path().join("root");
    let out = bin().env("INVASIONLAB_OUT", &root).args(["simulate", "--config", s(&cfg)]).output().unwrap();
    assert!(out.status.success());
    assert!(root.join("envrun").join("manifest.json").exists());
}

#[test]
fn dispersion_reports_spreading_speed() {
    let d = tempfile::tempdir().unwrap();
    let cfg = config(d.path(), "p.json", r#"{"params": {"a": 0.1, "gamma": 2.0, "eps": 0.0001}}"#);
    let o = d.path().join("o");
    let out = run(&["dispersion", "--config", s(&cfg), "--out", s(&o), "--threads", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&std::fs::read(o.join("dispersion.json")).unwrap()).unwrap();
    // close to the scalar values 0.6 and 0.3 for small eps
    assert!((v["c_lin"].as_f64().unwrap() - 0.6).abs() < 0.01, "{v}");
    assert!((v["eta_lin"].as_f64().unwrap() - 0.3).abs() < 0.02, "{v}");
    assert!((v["eta_lin_scalar"].as_f64().unwrap() - 0.3).abs() < 1e-15);
}

#[test]
fn missing_config_flag_is_a_config_error() {
    assert_eq!(run(&["dispersion"]).status.code(), Some(2));
}

#[test]
fn eikonal_erf_fit() {
    let d = tempfile::tempdir().unwrap();
    let cfg = config(
        d.path(),
        "e.json",
        r#"{"eikonal": {"D_eff": 1.0, "c_g": -0.5, "grid": {"x_min": -300.0, "x_max": 60.0, "n": 1441}, "dt": 0.05},
            "init": {"kind": "step", "amplitude": 1.0, "center": 0.0, "width": 0.5},
            "t_end": 200.0, "record_every": 1000}"#,
    );
    let o = d.path().join("o");
    let out = run(&["eikonal", "--config", s(&cfg), "--out", s(&o)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&std::fs::read(o.join("eikonal.json")).unwrap()).unwrap();
    let f = &v["erf_fit"];
    // heat kernel of D = 1: a unit step spreads as erf(ξ/√(4Dt)), and the
    // unnormalized erf carries a factor √π
    assert!((f["d0"].as_f64().unwrap() - 4.0 * 200.0 / 201.0).abs() < 0.05, "{v}");
    assert!((f["amplitude"].as_f64().unwrap() - 1.0 / std::f64::consts::PI.sqrt()).abs() < 0.005, "{v}");
}

#[test]
fn wavetrain_and_spectrum_from_a_run() {
    let d = tempfile::tempdir().unwrap();
    let body = small(r#"{"kind": "bump", "center": -180.0, "width": 5.0, "amplitude": 0.5}"#, 400.0, "[]")
        .replace(r#""x_min": -50.0, "x_max": 50.0, "n": 1001"#, r#""x_min": -200.0, "x_max": 200.0, "n": 4001"#)
        .replace(r#""record_every": 250"#, r#""record_every": 500"#);
    let cfg = config(d.path(), "mid.json", &body);
    let o = d.path().join("run");
    assert!(run(&["simulate", "--config", s(&cfg), "--out", s(&o)]).status.success());

    let f = d.path().join("front");
    let out = run(&["front", s(&o), "--out", s(&f)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fv: Value = serde_json::from_slice(&out.stdout).unwrap();
    let c_ps = fv["c_ps"].as_f64().unwrap();
    assert!(c_ps > 0.6 && c_ps < 0.8, "{fv}");

    let w = d.path().join("wt");
    let out = run(&["wavetrain", s(&o), "--out", s(&w)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let wv: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(wv["within_bound"].as_bool().unwrap(), "{wv}");
    assert!((wv["c"].as_f64().unwrap() - c_ps).abs() < 1e-12);

    let sp = d.path().join("sp");
    let out = run(&["spectrum", "--wavetrain", s(&w.join("wavetrain.json")), "--n-k", "16", "--out", s(&sp), "--threads", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&std::fs::read(sp.join("spectrum.json")).unwrap()).unwrap();
    let (cg, cga) = (v["c_g"].as_f64().unwrap(), v["c_g_adjoint"].as_f64().unwrap());
    assert!(cg < 0.0 && (cg - cga).abs() <= 1e-3 * cg.abs(), "{v}");
    assert!(v["D_eff"].as_f64().unwrap() > 0.0);
    let (head, rows) = read_csv(&sp.join("bloch.csv")).unwrap();
    assert_eq!(head, ["k", "rank", "re", "im"]);
    assert_eq!(rows.len(), 64);

    let r = d.path().join("rep");
    assert!(run(&["report", s(&o), "--out", s(&r)]).status.success());
    let md = std::fs::read_to_string(r.join("report.md")).unwrap();
    assert!(md.contains("snapshots: 41"), "{md}");
}
