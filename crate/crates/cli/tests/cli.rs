use std::path::Path;
use std::process::{Command, Output};

fn frontlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frontlab"))
        .args(args)
        .current_dir(dir)
        .env_remove("FRONTLAB_THREADS")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

const SIM: &str = r#"{"potential": {"kind": "quadratic", "a": 1.0}, "alpha": 0.25,
    "grid": {"R_y": 8.0, "n_y": 61, "L_x": 30.0, "n_x": 301}, "time": {"T": 6.0, "snapshots": 3}}"#;

#[test]
fn missing_potential_exits_2_with_json_error() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.json", r#"{"alpha": 0.25}"#);
    let out = frontlab(
        &["spectrum", "--config", "bad.json", "--out", "o"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "config");
    assert!(err["message"]
        .as_str()
        .unwrap()
        .contains("config.potential required"));
}

#[test]
fn unreadable_or_malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        frontlab(&["spectrum", "--config", "nope.json"], dir.path())
            .status
            .code(),
        Some(2)
    );
    write(dir.path(), "broken.json", "{ \"alpha\": ");
    assert_eq!(
        frontlab(&["spectrum", "--config", "broken.json"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(frontlab(&["spectrum"], dir.path()).status.code(), Some(2));
}

#[test]
fn outputs_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "sim.json", SIM);
    let a = frontlab(
        &[
            "simulate",
            "--config",
            "sim.json",
            "--out",
            "a",
            "--threads",
            "2",
        ],
        dir.path(),
    );
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = Command::new(env!("CARGO_BIN_EXE_frontlab"))
        .args(["simulate", "--config", "sim.json", "--out", "b"])
        .current_dir(dir.path())
        .env("FRONTLAB_THREADS", "2")
        .output()
        .unwrap();
    assert!(b.status.success());
    let c = frontlab(
        &[
            "simulate",
            "--config",
            "sim.json",
            "--out",
            "c",
            "--threads",
            "1",
        ],
        dir.path(),
    );
    assert!(c.status.success());
    let names: Vec<String> = std::fs::read_dir(dir.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert!(names.len() > 5);
    for name in &names {
        let fa = std::fs::read(dir.path().join("a").join(name)).unwrap();
        for other in ["b", "c"] {
            assert_eq!(
                fa,
                std::fs::read(dir.path().join(other).join(name)).unwrap(),
                "{other}/{name}"
            );
        }
    }
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn wave_rejection_is_partial_success() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "wave.json",
        r#"{"potential": {"kind": "quadratic", "a": 1.0}, "alpha": 0.25,
            "grid": {"R_y": 8.0, "n_y": 81, "L_x": 60.0, "n_x": 601},
            "speeds": [{"c_star": 0.9}, {"c_star": 1.0}]}"#,
    );
    let out = frontlab(&["wave", "--config", "wave.json", "--out", "w"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["waves"][0]["status"], "rejected: c < c*");
    assert_eq!(report["waves"][1]["status"], "ok");
}

#[test]
fn verify_filter_runs_only_selected_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let out = frontlab(&["verify", "--filter", "wave", "--out", "v"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let verdict: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("v/verdict.json")).unwrap())
            .unwrap();
    let ids: Vec<u64> = verdict["criteria"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["id"].as_u64().unwrap())
        .collect();
    assert_eq!(ids, vec![3, 4, 5, 6]);
    assert!(dir.path().join("v/profile_vs_closed_form.csv").exists());
    assert!(!dir.path().join("v/front_position.csv").exists());
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(table.matches("PASS").count(), 4);
}

#[test]
fn corrupted_preset_aborts_before_compute() {
    let dir = tempfile::tempdir().unwrap();
    let presets = dir.path().join("presets");
    std::fs::create_dir(&presets).unwrap();
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/presets");
    for e in std::fs::read_dir(&src).unwrap() {
        let p = e.unwrap().path();
        std::fs::copy(&p, presets.join(p.file_name().unwrap())).unwrap();
    }
    write(
        &presets,
        "invasion.json",
        r#"{"potential": {"kind": "quadratic"}, "alpha": 0.25}"#,
    );
    let out = frontlab(
        &[
            "verify", "--config", "presets", "--filter", "3", "--out", "v",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(
        err["message"].as_str().unwrap().contains("preset invasion"),
        "{err}"
    );
    assert!(!dir.path().join("v/verdict.json").exists());
}

#[test]
fn unknown_filter_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        frontlab(&["verify", "--filter", "bogus"], dir.path())
            .status
            .code(),
        Some(2)
    );
}
