use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_almost-thermal"));
    c.env_remove("ALMOST_THERMAL_OUT");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

#[test]
fn writes_tables_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["dynamics", "--seed", "5", "--param", "steps=10", "--param", "samples=200"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("dynamics.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("step [collisions],analytic_p0 [1]"), "{header}");
    assert_eq!(csv.lines().count(), 12);

    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["config"]["steps"], 10);
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    let outputs = manifest["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 2);
    let bytes = std::fs::read(dir.path().join("dynamics.csv")).unwrap();
    assert_eq!(outputs[0]["sha256"], almost_thermal_cli::run::sha256_hex(&bytes));
}

#[test]
fn json_format_adds_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["scaling", "--format", "json"], dir.path());
    assert!(out.status.success());
    let bundle: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("scaling.json")).unwrap()).unwrap();
    assert_eq!(bundle["manifest"]["experiment"], "scaling");
    assert_eq!(bundle["tables"][0]["name"], "scaling");
    assert!(dir.path().join("scaling.csv").exists());
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"delta_points": 5, "delta_min": -0.1, "delta_max": 0.1, "alphas": [1, "inf"]}"#).unwrap();
    let out = run(
        &["second_laws", "--config", cfg.to_str().unwrap(), "--param", "delta_points=3"],
        &dir.path().join("o"),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("o/second_laws.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().next().unwrap().ends_with("beta_delta_f_inf [1],exceeds_work_inf [flag]"));
}

#[test]
fn environment_sets_default_output() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["scaling"])
        .env("ALMOST_THERMAL_OUT", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("scaling.csv").exists());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 6] = [
        (&["nonsense"], "experiment"),
        (&["dynamics", "--param", "sigma=-0.1"], "sigma"),
        (&["dynamics", "--param", "colour=blue"], "colour"),
        (&["dynamics", "--param", "theta"], "param"),
        (&["dynamics", "--format", "xml"], "format"),
        (&["work_dist", "--param", "d=3", "--param", "samples=10"], "qubits"),
    ];
    for (args, needle) in cases {
        let out = run(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{args:?}: {err}");
    }
    let missing = run(&["dynamics", "--config", "/nonexistent/cfg.json"], dir.path());
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["heat_dist", "--seed", "3", "--param", "samples=20000", "--param", "kind=temperature"];
    assert!(run(&args, a.path()).status.success());
    let mut seq = args.to_vec();
    seq.push("--sequential");
    assert!(run(&seq, b.path()).status.success());
    for f in ["heat_dist.csv", "heat_dist_summary.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}
