use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const PULSE: &str = r#"{"f_idle_a": 6.2, "f_idle_b": 5.0, "f_interact": 5.5345, "t_hold": 13.85, "overshoot": -0.0036}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_diabatic"))
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    bin().args(args).arg("--config").arg(config).arg("--out").arg(out).output().unwrap()
}

fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
}

fn trace_config() -> String {
    format!(
        r#"{{"seed": 3, "device": "swap_demo", "pulse": {PULSE},
            "trace": {{"range": {{"min": 4.0, "max": 24.0, "steps": 81}}}}}}"#
    )
}

#[test]
fn trace_reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), &trace_config());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&["trace"], &cfg, &a).status.success());
    assert!(run(&["trace", "--threads", "2"], &cfg, &b).status.success());
    for name in ["trace.csv", "dips.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let text = fs::read_to_string(a.join("trace.csv")).unwrap();
    assert!(text.starts_with("# tool=diabatic "));
    assert!(text.contains("config_hash="));
    assert_eq!(data_lines(&a.join("trace.csv")).len(), 82);
}

#[test]
fn trace_dips_are_about_four_ns_apart() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), &trace_config());
    assert!(run(&["trace"], &cfg, tmp.path()).status.success());
    let dips: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("dips.json")).unwrap()).unwrap();
    let spacing: Vec<f64> =
        dips["data"]["leak_dip_spacing"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!(spacing.len() >= 3);
    let mean = spacing.iter().sum::<f64>() / spacing.len() as f64;
    assert!((mean - 4.0).abs() < 0.5, "{mean}");
    assert!(dips["meta"]["config_hash"].is_string());
}

#[test]
fn overrides_change_the_config_hash() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), &trace_config());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&["trace"], &cfg, &a).status.success());
    assert!(run(&["trace", "--dt", "0.004"], &cfg, &b).status.success());
    let head = |p: &Path| fs::read_to_string(p.join("trace.csv")).unwrap().lines().next().unwrap().to_string();
    assert_ne!(head(&a), head(&b));
}

#[test]
fn zero_step_sweep_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!(
            r#"{{"seed": 3, "device": "swap_demo", "pulse": {PULSE},
                "trace": {{"range": {{"min": 4.0, "max": 24.0, "steps": 0}}}}}}"#
        ),
    );
    let out = run(&["trace"], &cfg, tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn missing_config_and_bad_json_exit_two() {
    let tmp = TempDir::new().unwrap();
    let out = run(&["trace"], &tmp.path().join("absent.json"), tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let cfg = write_config(tmp.path(), "{\"seed\": ");
    assert_eq!(run(&["optimize"], &cfg, tmp.path()).status.code(), Some(2));
    let cfg = write_config(tmp.path(), r#"{"seed": 1, "device": "swap_demo"}"#);
    assert_eq!(run(&["trace"], &cfg, tmp.path()).status.code(), Some(2));
    assert_eq!(bin().arg("trace").output().unwrap().status.code(), Some(2));
}

#[test]
fn landscape_grid_has_one_row_per_point() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!(
            r#"{{"seed": 3, "device": "swap_demo", "pulse": {PULSE},
                "landscape": [
                  {{"axis_x": "hold_time", "x": {{"min": 12, "max": 16, "steps": 2}},
                    "axis_y": "interaction_freq", "y": {{"min": 5.5, "max": 5.6, "steps": 2}}}},
                  {{"axis_x": "overshoot", "x": {{"min": -0.01, "max": 0.01, "steps": 3}},
                    "axis_y": "hold_time", "y": {{"min": 12, "max": 16, "steps": 2}}}}]}}"#
        ),
    );
    assert!(run(&["landscape"], &cfg, tmp.path()).status.success());
    let first = tmp.path().join("landscape_0_hold_time_interaction_freq.csv");
    let second = tmp.path().join("landscape_1_overshoot_hold_time.csv");
    assert_eq!(data_lines(&first).len(), 1 + 2 * 2);
    assert_eq!(data_lines(&second).len(), 1 + 3 * 2);
}

#[test]
fn spectrum_and_optimize_find_the_fourth_order() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!(r#"{{"seed": 3, "device": "swap_demo", "pulse": {PULSE}, "optimize": {{"initial_hold": 14.5}}}}"#),
    );
    assert!(run(&["sync-spectrum"], &cfg, tmp.path()).status.success());
    let spectrum: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("spectrum.json")).unwrap()).unwrap();
    assert_eq!(spectrum["data"][0]["n"], 4);
    assert!(run(&["optimize"], &cfg, tmp.path()).status.success());
    let opt: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("optimize.json")).unwrap()).unwrap();
    assert_eq!(opt["data"]["sync_order"], 4);
    assert!(opt["data"]["objective"].as_f64().unwrap() < 1e-3);
}

fn matrix_json(angles: &str) -> String {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &format!(r#"{{"seed": 1, "device": "swap_demo", "fit_unitary": {{"angles": {angles}}}}}"#));
    assert!(run(&["fit-unitary"], &cfg, dir.path()).status.success());
    let fit: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("fit.json")).unwrap()).unwrap();
    serde_json::to_string(&fit["data"]["matrix"]).unwrap()
}

#[test]
fn fit_unitary_recovers_the_cphase_row_from_a_matrix_file() {
    let tmp = TempDir::new().unwrap();
    let matrix = tmp.path().join("u.json");
    fs::write(
        &matrix,
        matrix_json(r#"{"theta": 0.01, "phi": 3.29, "delta_plus": 0.39, "delta_c": -0.13, "delta_d": -3.96}"#),
    )
    .unwrap();
    let out = bin().arg("fit-unitary").arg("--matrix").arg(&matrix).arg("--out").arg(tmp.path()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fit: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("fit.json")).unwrap()).unwrap();
    let f = &fit["data"]["fit"];
    for (key, want) in [("theta", 0.01), ("phi", 3.29), ("delta_plus", 0.39), ("delta_c", -0.13)] {
        assert!((f[key].as_f64().unwrap() - want).abs() < 1e-4, "{key}: {}", f[key]);
    }
    assert_eq!(f["weak_angle"], "delta_d");
}

#[test]
fn identity_matrix_fits_to_zero_angles() {
    let tmp = TempDir::new().unwrap();
    let matrix = tmp.path().join("id.json");
    fs::write(
        &matrix,
        r#"{"real": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]], "imag": [[0,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]}"#,
    )
    .unwrap();
    assert!(bin().arg("fit-unitary").arg("--matrix").arg(&matrix).arg("--out").arg(tmp.path()).output().unwrap().status.success());
    let fit: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("fit.json")).unwrap()).unwrap();
    for key in ["theta", "phi", "delta_plus", "delta_c"] {
        assert!(fit["data"]["fit"][key].as_f64().unwrap().abs() < 1e-6, "{key}");
    }
}

#[test]
fn corrupted_matrix_file_exits_two() {
    let tmp = TempDir::new().unwrap();
    let matrix = tmp.path().join("bad.json");
    fs::write(&matrix, r#"{"real": [[1,0,0],[0,1]], "imag": "#).unwrap();
    let out = bin().arg("fit-unitary").arg("--matrix").arg(&matrix).arg("--out").arg(tmp.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.json"));
    let out = bin().arg("fit-unitary").arg("--matrix").arg(tmp.path().join("none.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

const IDEAL_GATE: &str = r#"{"theta": 1.42, "phi": 0.48, "delta_plus": 2.02, "delta_c": 4.34, "delta_d": 4.39}"#;

#[test]
fn noiseless_ideal_xeb_has_unit_decay() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!(
            r#"{{"seed": 11, "device": "benchmark_demo",
                "xeb": {{"cycles": [1, 4, 8, 16], "circuits": 6, "gate": {{"ideal": {IDEAL_GATE}}}}}}}"#
        ),
    );
    assert!(run(&["xeb"], &cfg, tmp.path()).status.success());
    let report: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("xeb_report.json")).unwrap()).unwrap();
    for v in report["data"]["report"]["alpha"]["value"].as_array().unwrap() {
        assert!((v.as_f64().unwrap() - 1.0).abs() < 1e-9, "{v}");
    }
    assert_eq!(data_lines(&tmp.path().join("alpha.csv")).len(), 5);
    assert!(!tmp.path().join("counts.csv").exists());
}

#[test]
fn sampled_xeb_reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!(
            r#"{{"seed": 11, "device": "benchmark_demo",
                "xeb": {{"cycles": [1, 4, 8, 16], "circuits": 6, "shots": 200, "gate": {{"ideal": {IDEAL_GATE}}}}}}}"#
        ),
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&["xeb"], &cfg, &a).status.success());
    assert!(run(&["xeb", "--threads", "1"], &cfg, &b).status.success());
    for name in ["xeb_report.json", "alpha.csv", "purity.csv", "leakage.csv", "counts.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn seed_flag_changes_xeb_circuits() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"seed": 11, "device": "benchmark_demo",
            "xeb": {"cycles": [1, 2, 3, 4], "circuits": 3, "shots": 50,
                    "gate": {"ideal": {"theta": 1.0, "phi": 0.3, "delta_plus": 0, "delta_c": 0, "delta_d": 0}}}}"#,
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&["xeb"], &cfg, &a).status.success());
    assert!(run(&["xeb", "--seed", "12"], &cfg, &b).status.success());
    assert_ne!(fs::read(a.join("counts.csv")).unwrap(), fs::read(b.join("counts.csv")).unwrap());
}
