use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qlqg"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs").join(name)
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

#[test]
fn compare_config_passes_and_reports_every_sequence() {
    let out = bin()
        .args(["--config"])
        .arg(config("scalar_compare.json"))
        .args(["--trials", "2000"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["mode"], "compare");
    assert_eq!(r["pass"], true);
    for key in ["K_max", "P_max", "mu_max", "R_max", "u_max"] {
        assert!(r["deviations"][key].as_f64().unwrap() <= 1e-4, "{key}");
    }
    let s0 = &r["classical"]["s0"];
    assert!((s0["printed"].as_f64().unwrap() - 41.0 / 12.0).abs() < 1e-12);
    assert!(r["classical"]["monte_carlo"]["z"]["terminal_corrected"].is_number());
    assert!(r["resources"]["totals"]["queries"].as_u64().unwrap() > 0);
    assert_eq!(r["problem_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn classical_mode_has_no_quantum_fields() {
    let out = bin().args(["--mode", "classical", "--horizon", "4"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r.get("resources").is_none());
    assert!(r.get("deviations").is_none());
    assert_eq!(r["classical"]["u"].as_array().unwrap().len(), 4);
}

#[test]
fn report_file_is_written_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<PathBuf> = (0..2).map(|i| dir.path().join(format!("r{i}.json"))).collect();
    for p in &paths {
        let status = bin()
            .args(["--mode", "quantum", "--seed", "9", "--horizon", "3", "--out"])
            .arg(p)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let strip = |p: &Path| {
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("timings");
        v
    };
    assert_eq!(strip(&paths[0]), strip(&paths[1]));
}

#[test]
fn tolerance_too_tight_exits_with_failure() {
    let out = bin()
        .args(["--mode", "compare", "--horizon", "3", "--eps-prime-r", "1e-2", "--eps-prime-v", "1e-2"])
        .args(["--match-tol", "1e-12"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["pass"], false);
}

#[test]
fn bad_configs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"mode": "compare", "unknown": 1}"#).unwrap();
    let out = bin().arg("--config").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().args(["--mode", "sideways"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().arg("--config").arg(dir.path().join("missing.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn infeasible_beta_is_a_numeric_error() {
    let out = bin().args(["--mode", "quantum", "--horizon", "2", "--beta", "1.01"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn shipped_configs_parse() {
    for entry in std::fs::read_dir(config("")).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        qlqg::harness::RunConfig::from_json(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}
