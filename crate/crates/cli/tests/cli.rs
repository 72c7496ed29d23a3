use std::path::Path;
use std::process::{Command, Output};

use continuum_cli::{rows, vec_of};
use continuum_core::nalgebra::{Vector3, Vector4};
use continuum_core::{
    estimate_force, forward_kinematics, inverse_kinematics_config_to_joint, jacobians, read_imu_log, stiffness_bundle,
    ArmParameters, Configuration,
};
use serde_json::{json, Value};

fn continuum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_continuum"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn envelope(args: &[&str]) -> Value {
    let out = continuum(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let value: Value = serde_json::from_slice(&out.stdout).expect("stdout is JSON");
    check_schema(&value);
    value
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Checks the subset of JSON Schema used by the published envelope schema.
fn check_schema(value: &Value) {
    let schema: Value = serde_json::from_str(include_str!("../schema/envelope.schema.json")).expect("schema parses");
    let obj = value.as_object().expect("envelope is an object");
    let props = schema["properties"].as_object().unwrap();
    for key in schema["required"].as_array().unwrap() {
        assert!(obj.contains_key(key.as_str().unwrap()), "missing {key}");
    }
    for (key, field) in obj {
        let spec = props.get(key).unwrap_or_else(|| panic!("unexpected key {key}"));
        let ok = match spec["type"].as_str().unwrap() {
            "string" => field.is_string(),
            "object" => field.is_object(),
            "array" => field.as_array().is_some_and(|a| a.iter().all(Value::is_string)),
            other => panic!("schema type {other} not handled"),
        };
        assert!(ok, "{key} has the wrong type");
        if let Some(allowed) = spec.get("enum") {
            assert!(
                allowed.as_array().unwrap().contains(field),
                "{field} not allowed for {key}"
            );
        }
    }
}

fn psi(theta_deg: f64, delta_deg: f64) -> Configuration {
    Configuration::from_degrees(theta_deg, delta_deg).unwrap()
}

#[test]
fn fk_output_matches_library() {
    let out = envelope(&["fk", "--theta-deg", "90", "--delta-deg", "30"]);
    let pose = forward_kinematics(&ArmParameters::prototype(), &psi(90.0, 30.0));
    let expected = json!({"rotation": rows(&pose.rotation), "position_m": vec_of(&pose.position)});
    assert_eq!(out["result"], expected);
    assert_eq!(out["command"], "fk");
    assert_eq!(out["tool_version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn ik_output_matches_library() {
    let out = envelope(&["ik", "--theta-deg", "45", "--delta-deg", "-20"]);
    let q = inverse_kinematics_config_to_joint(&ArmParameters::prototype(), &psi(45.0, -20.0));
    let q_mm: Vec<f64> = q.0.iter().map(|v| v * 1e3).collect();
    assert_eq!(out["result"], json!({ "q_mm": q_mm }));
}

#[test]
fn jacobian_output_matches_library() {
    let out = envelope(&["jacobian", "--theta-deg", "60", "--delta-deg", "15"]);
    let j = jacobians(&ArmParameters::prototype(), &psi(60.0, 15.0));
    let expected = json!({
        "J_q": rows(&j.j_q_psi),
        "J_v": rows(&j.j_v_psi),
        "J_w": rows(&j.j_w_psi),
        "J_x": rows(&j.j_x_psi),
    });
    assert_eq!(out["result"], expected);
}

#[test]
fn stiffness_output_matches_library() {
    let out = envelope(&[
        "stiffness",
        "--theta-deg",
        "45",
        "--tau",
        "1,0.5,0,0",
        "--force",
        "0.5,0,-0.3",
    ]);
    let tau = Vector4::new(1.0, 0.5, 0.0, 0.0);
    let force = Vector3::new(0.5, 0.0, -0.3);
    let b = stiffness_bundle(&ArmParameters::prototype(), &psi(45.0, 0.0), &tau, true, Some(&force)).unwrap();
    let expected = json!({
        "H_psi": rows(&b.h_psi),
        "K_q": rows(&b.k_q),
        "K_psi": rows(&b.k_psi),
        "K_X": rows(&b.k_x.unwrap()),
    });
    assert_eq!(out["result"], expected);
}

#[test]
fn stiffness_without_task_space_allows_straight_pose() {
    let out = envelope(&["stiffness", "--theta-deg", "0", "--no-task-space"]);
    assert!(out["result"]["K_X"].is_null());
    let refused = continuum(&["stiffness", "--theta-deg", "0"]);
    assert_eq!(refused.status.code(), Some(2));
}

#[test]
fn params_file_changes_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("params.json");
    std::fs::write(
        &path,
        r#"{"L_mm": 111, "r_mm": 12, "Ep_GPa": 82, "ET_GPa": 2.34, "Ip_mm4": 0.2485, "A_mm2": 0.2642}"#,
    )
    .unwrap();
    let out = envelope(&["--params", path.to_str().unwrap(), "fk", "--theta-deg", "0"]);
    assert_eq!(out["result"]["position_m"][2], json!(0.111));
    assert_eq!(out["inputs_echo"]["params"]["L_mm"], json!(111.0));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(continuum(&["--help"]).status.code(), Some(0));
    assert_eq!(continuum(&["stiffness", "--help"]).status.code(), Some(0));
    assert_eq!(continuum(&["--version"]).status.code(), Some(0));
}

#[test]
fn contract_violations_exit_two() {
    let cases: &[&[&str]] = &[
        &["fk", "--theta-deg", "200"],
        &["fk", "--theta-deg", "-5"],
        &["fk", "--theta-deg", "180"],
        &["fk"],
        &["fk", "--theta-deg", "10", "--bogus"],
        &["stiffness", "--theta-deg", "30", "--tau", "1,2,3"],
        &["frobnicate"],
        &["--params", "/nonexistent/params.json", "fk", "--theta-deg", "10"],
    ];
    for args in cases {
        let out = continuum(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?} wrote to stdout");
        assert!(!stderr(&out).is_empty(), "{args:?} gave no diagnostic");
    }
}

#[test]
fn malformed_log_reports_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.log");
    std::fs::write(&path, "imu-log,v1\n0.00,1,0,0,0\n0.01,1,0,zero,0\n").unwrap();
    let out = continuum(&[
        "estimate-force",
        "--log",
        path.to_str().unwrap(),
        "--ref-theta-deg",
        "45",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn empty_log_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.log");
    std::fs::write(&path, "imu-log,v1\n").unwrap();
    let out = continuum(&[
        "estimate-force",
        "--log",
        path.to_str().unwrap(),
        "--ref-theta-deg",
        "45",
    ]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(&path, "").unwrap();
    let out = continuum(&[
        "estimate-force",
        "--log",
        path.to_str().unwrap(),
        "--ref-theta-deg",
        "45",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

fn simulate(out: &Path, seed: &str) {
    envelope(&[
        "simulate",
        "--theta-deg",
        "45",
        "--delta-deg",
        "10",
        "--force",
        "0.25,0.05,-0.15",
        "--noise-deg",
        "0.2",
        "--seed",
        seed,
        "--samples",
        "150",
        "--out",
        out.to_str().unwrap(),
    ]);
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (
        dir.path().join("a.log"),
        dir.path().join("b.log"),
        dir.path().join("c.log"),
    );
    simulate(&a, "7");
    simulate(&b, "7");
    simulate(&c, "8");
    let (a, b, c) = (
        std::fs::read(a).unwrap(),
        std::fs::read(b).unwrap(),
        std::fs::read(c).unwrap(),
    );
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn simulate_then_estimate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("run.log");
    envelope(&[
        "simulate",
        "--theta-deg",
        "45",
        "--force",
        "0.25,0,-0.15",
        "--samples",
        "50",
        "--out",
        log.to_str().unwrap(),
    ]);
    let out = envelope(&[
        "estimate-force",
        "--log",
        log.to_str().unwrap(),
        "--ref-theta-deg",
        "45",
        "--window",
        "50",
    ]);
    let params = ArmParameters::prototype();
    let samples = read_imu_log(&log).unwrap();
    let est = estimate_force(&params, &psi(45.0, 0.0), &Vector4::zeros(), &samples, 50).unwrap();
    assert_eq!(out["result"]["F_ext_N"], json!(vec_of(&est.f_ext_hat)));
    assert!(out["warnings"].as_array().unwrap().is_empty());

    // Only the component of F seen through J_v is observable: J_v^T F is recovered.
    let f: Vec<f64> = serde_json::from_value(out["result"]["F_ext_N"].clone()).unwrap();
    let j_v = jacobians(&params, &psi(45.0, 0.0)).j_v_psi;
    let err = (j_v.transpose() * (Vector3::from_vec(f) - Vector3::new(0.25, 0.0, -0.15))).norm();
    assert!(err < 1e-9, "generalized force mismatch {err}");
}

#[test]
fn repeated_logs_are_averaged_and_short_logs_warn() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.log"), dir.path().join("b.log"));
    simulate(&a, "1");
    simulate(&b, "2");
    let out = envelope(&[
        "estimate-force",
        "--log",
        a.to_str().unwrap(),
        "--log",
        b.to_str().unwrap(),
        "--ref-theta-deg",
        "45",
        "--ref-delta-deg",
        "10",
        "--window",
        "500",
    ]);
    let repeats = out["result"]["repeats"].as_array().unwrap();
    assert_eq!(repeats.len(), 2);
    for k in 0..3 {
        let mean = (repeats[0]["F_ext_N"][k].as_f64().unwrap() + repeats[1]["F_ext_N"][k].as_f64().unwrap()) / 2.0;
        assert!((out["result"]["F_ext_N"][k].as_f64().unwrap() - mean).abs() < 1e-15);
    }
    assert_eq!(out["warnings"].as_array().unwrap().len(), 2);
}

#[test]
fn near_straight_reference_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("run.log");
    simulate(&log, "3");
    let out = continuum(&["estimate-force", "--log", log.to_str().unwrap(), "--ref-theta-deg", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn calibration_offset_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("run.log");
    simulate(&log, "4");
    let identity = dir.path().join("identity.json");
    std::fs::write(&identity, r#"{"R_offset": [[1,0,0],[0,1,0],[0,0,1]]}"#).unwrap();
    let swapped = dir.path().join("swapped.json");
    std::fs::write(&swapped, r#"{"R_offset": [[0,-1,0],[1,0,0],[0,0,1]]}"#).unwrap();
    let base = [
        "estimate-force",
        "--log",
        log.to_str().unwrap(),
        "--ref-theta-deg",
        "45",
        "--ref-delta-deg",
        "10",
    ];
    let plain = envelope(&base);
    let with_identity = envelope(&[&base[..], &["--calibration", identity.to_str().unwrap()]].concat());
    let with_swap = envelope(&[&base[..], &["--calibration", swapped.to_str().unwrap()]].concat());
    let force = |v: &Value| -> Vector3<f64> {
        Vector3::from_vec(serde_json::from_value(v["result"]["F_ext_N"].clone()).unwrap())
    };
    assert!((force(&plain) - force(&with_identity)).norm() < 1e-12);
    assert!((force(&plain) - force(&with_swap)).norm() > 1e-3);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"R_offset": [[2,0,0],[0,1,0],[0,0,1]]}"#).unwrap();
    let out = continuum(&[&base[..], &["--calibration", bad.to_str().unwrap()]].concat());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_writes_expected_rows() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("sweep.json");
    let csv = dir.path().join("sweep.csv");
    std::fs::write(
        &spec,
        r#"{"theta_deg": [10, 60, 10], "delta_deg": 0, "direction": "inward", "load_n": [0.2, 1.0, 0.2]}"#,
    )
    .unwrap();
    let out = envelope(&[
        "sweep",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out["result"]["rows"], json!(30));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], continuum_core::sim::SWEEP_CSV_HEADER);
    assert_eq!(lines.len(), 31);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 7));

    std::fs::write(
        &spec,
        r#"{"theta_deg": [10, 60, 0], "direction": "inward", "load_n": [0, 1, 0.2]}"#,
    )
    .unwrap();
    let out = continuum(&[
        "sweep",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_two() {
    let out = continuum(&[
        "simulate",
        "--theta-deg",
        "45",
        "--force",
        "0.1,0,0",
        "--out",
        "/nonexistent/dir/out.log",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
