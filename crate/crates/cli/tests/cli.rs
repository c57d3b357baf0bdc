use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn swflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn small_config(out: &str, max_iters: usize) -> Value {
    json!({
        "dims": [3, 3, 3, 3],
        "spacing": 1.0,
        "scalar_curvature": "constant:-1",
        "seed": 4,
        "amplitudes": {"a": 0.3, "phi": 0.8},
        "minimize": {"max_iters": max_iters},
        "output_dir": out
    })
}

#[test]
fn zero_iterations_writes_one_history_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "exp.json", &small_config("out", 0));
    let o = swflow(&["run", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let out = dir.path().join("out");
    let history = std::fs::read_to_string(out.join("history.csv")).unwrap();
    let lines: Vec<&str> = history.lines().collect();
    assert_eq!(
        lines[0],
        "iter,energy,grad_norm,phi_linf,excess_measure,radial_excess,gauge_step_distance"
    );
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("0,"));

    let summary = read_json(&out.join("summary.json"));
    let mut keys: Vec<&str> = summary.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    keys.sort();
    assert_eq!(
        keys,
        [
            "config",
            "energy_lower_bound",
            "eta_norm",
            "excess_measure",
            "final_energy",
            "final_grad_norm",
            "iterations",
            "phi_linf",
            "ps_diagnostics",
            "radial_excess",
            "recorded_iterates",
            "termination",
            "wall_time_seconds"
        ]
    );
    assert_eq!(summary["termination"], "max_iters");
    assert_eq!(summary["iterations"], 0);
    // too short for the diagnostics
    assert!(summary["ps_diagnostics"].is_null());
    assert_eq!(summary["config"]["seed"], 4);

    let fin = read_json(&out.join("final.json"));
    assert_eq!(fin["version"], 1);
    assert_eq!(fin["a"].as_array().unwrap().len(), 4 * 81);
}

#[test]
fn converged_run_reports_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "exp.json", &small_config("out", 2000));
    let o = swflow(&["run", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read_json(&dir.path().join("out/summary.json"));
    assert_eq!(summary["termination"], "converged");
    assert!(summary["final_grad_norm"].as_f64().unwrap() <= 1e-6);
    assert!(summary["phi_linf"].as_f64().unwrap() <= 1.05);
    assert!(summary["ps_diagnostics"]["summable"].as_bool().unwrap());

    // energies never increase along the recorded history
    let history = std::fs::read_to_string(dir.path().join("out/history.csv")).unwrap();
    let energies: Vec<f64> = history
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(energies.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs()));
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_config(dir.path(), "a.json", &small_config("a", 25));
    let b = write_config(dir.path(), "b.json", &small_config("b", 25));
    assert!(swflow(&["run", a.to_str().unwrap()]).status.success());
    assert!(swflow(&["run", b.to_str().unwrap()]).status.success());
    for f in ["history.csv", "final.json"] {
        let x = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let y = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
}

#[test]
fn max_principle_experiment_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "dims": [6, 6, 6, 6],
        "spacing": 1.0,
        "scalar_curvature": "constant:-1",
        "seed": 7,
        "amplitudes": {"a": 0.2, "phi": 1.0},
        "initial_phi_linf": 3.0,
        "output_dir": "out"
    });
    let path = write_config(dir.path(), "exp.json", &cfg);
    let o = swflow(&["run", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read_json(&dir.path().join("out/summary.json"));
    assert_eq!(summary["termination"], "converged");
    assert!(summary["phi_linf"].as_f64().unwrap() <= 1.05, "{summary}");
}

#[test]
fn missing_config_exits_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = swflow(&["run", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn invalid_configs_exit_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut bad_dims = small_config("out", 5);
    bad_dims["dims"] = json!([3, 1, 3, 3]);
    let mut bad_curvature = small_config("out", 5);
    bad_curvature["scalar_curvature"] = json!("wave:1");
    let mut unknown = small_config("out", 5);
    unknown["colour"] = json!("blue");
    let mut bad_params = small_config("out", 5);
    bad_params["minimize"]["armijo_c"] = json!(2.0);
    for (i, cfg) in [bad_dims, bad_curvature, unknown, bad_params].iter().enumerate() {
        let path = write_config(dir.path(), &format!("bad{i}.json"), cfg);
        let o = swflow(&["run", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "config {i}");
    }
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unwritable_output_dir_fails() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("blocker"), "not a directory").unwrap();
    let path = write_config(dir.path(), "exp.json", &small_config("blocker/out", 3));
    let o = swflow(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("output directory"));
}

#[test]
fn fast_check_passes() {
    let o = swflow(&["check", "--level", "fast"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    assert!(stdout.lines().filter(|l| l.starts_with("PASS")).count() >= 15);
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn default_check_level_is_fast() {
    let o = swflow(&["check"]);
    assert!(o.status.success());
    assert!(!String::from_utf8_lossy(&o.stdout).contains("8^4"));
}

#[test]
fn full_check_reports_refinement_study() {
    let o = swflow(&["check", "--level", "full"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    let line = stdout
        .lines()
        .find(|l| l.contains("weitzenbock defect contraction"))
        .expect("refinement line");
    assert!(line.starts_with("PASS"));
}

#[test]
fn corrupted_clifford_table_fails_check() {
    let o = swflow(&["check", "--corrupt-clifford"]);
    assert_eq!(o.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&o.stdout);
    let line = stdout.lines().find(|l| l.contains("clifford relation")).unwrap();
    assert!(line.starts_with("FAIL"), "{line}");
}

#[test]
fn unknown_level_is_a_usage_error() {
    assert_eq!(swflow(&["check", "--level", "medium"]).status.code(), Some(2));
}

fn random_saved_configuration(dir: &Path) -> PathBuf {
    let mut cfg = small_config("seed", 0);
    cfg["amplitudes"] = json!({"a": 2.5, "phi": 1.0});
    cfg["flux"] = json!([[0, 0, 1, 0], [0, 0, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 0]]);
    let path = write_config(dir, "seed.json", &cfg);
    assert!(swflow(&["run", path.to_str().unwrap()]).status.success());
    dir.join("seed/final.json")
}

fn link_values(path: &Path) -> Vec<f64> {
    read_json(path)["a"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect()
}

#[test]
fn gaugefix_writes_configuration_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = random_saved_configuration(dir.path());
    let once = dir.path().join("once.json");
    let o = swflow(&["gaugefix", input.to_str().unwrap(), once.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("energy drift"));

    let report = read_json(&dir.path().join("once.report.json"));
    assert!(report["residual"].as_f64().unwrap() <= 1e-8);
    assert!(report["relative_energy_drift"].as_f64().unwrap() <= 1e-10);
    let harmonic: Vec<f64> = report["harmonic"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let bound = std::f64::consts::PI / 3.0;
    assert!(harmonic.iter().all(|&m| (-bound..bound).contains(&m)), "{harmonic:?}");

    // fixing the fixed output is a no-op
    let twice = dir.path().join("twice.json");
    assert!(swflow(&["gaugefix", once.to_str().unwrap(), twice.to_str().unwrap()]).status.success());
    let again = read_json(&dir.path().join("twice.report.json"));
    assert_eq!(again["winding"], json!([0, 0, 0, 0]));
    let (a1, a2) = (link_values(&once), link_values(&twice));
    let worst = a1.iter().zip(&a2).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-10, "{worst}");
}

#[test]
fn gaugefix_file_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let out = dir.path().join("out.json");
    let o = swflow(&["gaugefix", missing.to_str().unwrap(), out.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
    assert!(!out.exists());

    let input = random_saved_configuration(dir.path());
    let blocked = dir.path().join("no/such/dir/out.json");
    let o = swflow(&["gaugefix", input.to_str().unwrap(), blocked.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
}
