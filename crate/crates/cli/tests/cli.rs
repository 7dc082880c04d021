//! Exercise the binary: exit codes and an end-to-end run.

use std::process::Command;

fn partbench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_partbench"))
}

#[test]
fn missing_config_file_exits_2() {
    let out = partbench()
        .args(["gen", "--config", "/nonexistent/config.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_config_value_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let mut value: serde_json::Value = serde_json::from_str(
        &String::from_utf8(partbench().arg("default-config").output().unwrap().stdout).unwrap(),
    )
    .unwrap();
    value["render"]["tile"] = serde_json::json!(30);
    std::fs::write(&path, serde_json::to_string(&value).unwrap()).unwrap();
    let out = partbench()
        .args(["gen", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stage_without_inputs_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = partbench()
        .args(["render", "--out-dir"])
        .arg(dir.path().join("empty"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn full_run_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.json");
    let mut value: serde_json::Value = serde_json::from_str(
        &String::from_utf8(partbench().arg("default-config").output().unwrap().stdout).unwrap(),
    )
    .unwrap();
    value["dataset"]["size"] = serde_json::json!(2);
    value["dataset"]["volume_samples"] = serde_json::json!(10000);
    value["render"]["tile"] = serde_json::json!(32);
    value["carve"]["resolution"] = serde_json::json!(32);
    value["noise"]["runs"] = serde_json::json!(2);
    value["out_dir"] = serde_json::json!(dir.path().join("out").display().to_string());
    std::fs::write(&config_path, serde_json::to_string(&value).unwrap()).unwrap();

    let out = partbench()
        .args(["all", "--config"])
        .arg(&config_path)
        .args(["--completer", "oracle"])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = std::fs::read_to_string(dir.path().join("out/summary.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert!(parsed["segmentation"]["map"]["0.50"].is_number());
    assert!(parsed["reassembly"]["mean_abs_delta"].is_number());
}
