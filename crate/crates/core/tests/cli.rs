use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use riskmp::cli::{ExperimentConfig, StampedCsv};

const SMALL_PORTFOLIO: &str = r#"{
    "problem": { "kind": "portfolio" },
    "risk": { "kind": "entropic", "theta": 1.0 },
    "n_steps": 10,
    "n_paths": 500,
    "n_actions": 11,
    "msa": { "max_iters": 5 },
    "seed": 3
}"#;

fn riskmp(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riskmp"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn solve_then_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_PORTFOLIO);
    let out = dir.path().join("run");
    let solved = riskmp(&["solve"], &config, &out);
    assert_eq!(solved.status.code(), Some(0), "{}", String::from_utf8_lossy(&solved.stderr));
    for f in ["objective_trace.csv", "policy.csv", "adjoints.csv", "checks.csv", "summary.json"] {
        assert!(out.join(f).exists(), "missing {f}");
    }

    let cfg = ExperimentConfig::from_json_str(SMALL_PORTFOLIO).unwrap();
    let trace = StampedCsv::read(&out.join("objective_trace.csv")).unwrap();
    assert_eq!(trace.stamp.config_hash, cfg.hash());
    assert_eq!(trace.stamp.seed, 3);
    assert!(!trace.rows.is_empty());

    let report = riskmp(&["report"], &config, &out);
    assert_eq!(report.status.code(), Some(0), "{}", String::from_utf8_lossy(&report.stderr));
    assert!(out.join("report_objective.csv").exists());
}

#[test]
fn report_refuses_artifacts_from_another_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_PORTFOLIO);
    let out = dir.path().join("run");
    assert_eq!(riskmp(&["solve"], &config, &out).status.code(), Some(0));

    let other = dir.path().join("other.json");
    std::fs::write(&other, SMALL_PORTFOLIO.replace("\"theta\": 1.0", "\"theta\": 2.0")).unwrap();
    let report = riskmp(&["report"], &other, &out);
    assert_eq!(report.status.code(), Some(1));
    let err: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("error.json")).unwrap()).unwrap();
    assert_eq!(err["command"], "report");
    assert_eq!(err["kind"], "artifact_mismatch");
}

#[test]
fn output_dir_does_not_change_the_hash() {
    let a = ExperimentConfig::from_json_str(SMALL_PORTFOLIO).unwrap();
    let b = ExperimentConfig::from_json_str(
        &SMALL_PORTFOLIO.replace("\"seed\": 3", "\"seed\": 3, \"output_dir\": \"elsewhere\""),
    )
    .unwrap();
    assert_eq!(a.hash(), b.hash());
    let c = ExperimentConfig::from_json_str(&SMALL_PORTFOLIO.replace("\"n_paths\": 500", "\"n_paths\": 501")).unwrap();
    assert_ne!(a.hash(), c.hash());
}

#[test]
fn usage_and_config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let bad_command = Command::new(env!("CARGO_BIN_EXE_riskmp")).arg("optimize").output().unwrap();
    assert_eq!(bad_command.status.code(), Some(2));

    let missing = riskmp(&["solve"], &dir.path().join("absent.json"), &out);
    assert_eq!(missing.status.code(), Some(2));

    for body in [
        "{ not json",
        r#"{ "problem": { "kind": "portfolio" }, "risk": { "kind": "expectation" } }"#,
        r#"{ "problem": { "kind": "portfolio" }, "risk": { "kind": "entropic", "theta": -1 }, "seed": 1 }"#,
        r#"{ "problem": { "kind": "portfolio" }, "risk": { "kind": "expectation" }, "seed": 1, "n_paths": 0 }"#,
        r#"{ "problem": { "kind": "portfolio" }, "risk": { "kind": "expectation" }, "seed": 1, "extra": 1 }"#,
    ] {
        let config = write_config(dir.path(), body);
        let run = riskmp(&["simulate"], &config, &out);
        assert_eq!(run.status.code(), Some(2), "accepted {body}");
    }
    assert!(!out.join("error.json").exists());

    let config = write_config(dir.path(), SMALL_PORTFOLIO);
    let zero_threads = Command::new(env!("CARGO_BIN_EXE_riskmp"))
        .args(["simulate", "--threads", "0", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(zero_threads.status.code(), Some(2));
}

#[test]
fn runtime_failure_exits_1_with_error_record() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{
            "problem": {
                "kind": "custom",
                "actions": [0.0, 1.0],
                "drift": [[0.0, 1e6], [0.0, 1e6]],
                "diffusion": [[1.0, 0.0], [1.0, 0.0]],
                "cost": [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
                "terminal": [0.0, 0.0, 1.0]
            },
            "risk": { "kind": "expectation" },
            "n_steps": 200,
            "n_paths": 50,
            "seed": 9
        }"#,
    );
    let out = dir.path().join("run");
    let run = riskmp(&["simulate"], &config, &out);
    assert_eq!(run.status.code(), Some(1), "{}", String::from_utf8_lossy(&run.stderr));
    let err: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("error.json")).unwrap()).unwrap();
    assert_eq!(err["kind"], "numerical_blowup");
    assert_eq!(err["seed"], 9);
}

#[test]
fn simulate_writes_stamped_tables() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_PORTFOLIO);
    let out = dir.path().join("run");
    assert_eq!(riskmp(&["simulate"], &config, &out).status.code(), Some(0));
    let costs = StampedCsv::read(&out.join("costs.csv")).unwrap();
    assert_eq!(costs.stamp.seed, 3);
    let paths = StampedCsv::read(&out.join("paths.csv")).unwrap();
    assert_eq!(paths.stamp, costs.stamp);
}

#[test]
fn seed_override_changes_the_stamp() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_PORTFOLIO);
    let out = dir.path().join("run");
    let run = Command::new(env!("CARGO_BIN_EXE_riskmp"))
        .args(["simulate", "--seed", "11", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0));
    assert_eq!(StampedCsv::read(&out.join("costs.csv")).unwrap().stamp.seed, 11);
}
