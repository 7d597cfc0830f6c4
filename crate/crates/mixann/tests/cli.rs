//! End-to-end checks of the `mixann` binary: exit codes, diagnostics on
//! malformed configs, and report conformance to the shipped JSON schema.

use std::path::Path;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_mixann")
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path
}

fn tiny_config_body() -> &'static str {
    r#"{
        "dataset": {"kind": "toy", "majority": 60, "minority": 12, "clusters": 2, "spread": 1.0},
        "split": {"test_fraction": 0.2, "val_fraction_of_train": 0.2},
        "methods": ["none", "smote", "mixann"],
        "oversample": {"n_synthetic": 20, "k_neighbors": 3},
        "classifier": {"kind": "knn", "knn_k": 5},
        "train": {"episodes": 2, "rollout_episodes": 2},
        "env": {"max_steps": 4},
        "agent": {"batch_size": 8},
        "seeds": [0, 1],
        "grid_resolution": 8,
        "trace": true
    }"#
}

fn compiled_schema() -> jsonschema::Validator {
    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

#[test]
fn benchmark_report_validates_against_shipped_schema() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), tiny_config_body());
    let out = dir.path().join("out");
    let status = Command::new(bin())
        .args(["benchmark", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let validator = compiled_schema();
    let errors: Vec<String> = validator.iter_errors(&report).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema violations: {errors:?}");

    // Three methods produce three rows, each averaging the two seeds.
    let results = report["results"].as_array().unwrap();
    assert_eq!(results.len(), 3);
    for row in results {
        assert_eq!(row["per_seed"].as_array().unwrap().len(), 2);
    }

    // The step trace is well-formed JSON lines.
    let trace = std::fs::read_to_string(out.join("trace.jsonl")).unwrap();
    assert!(!trace.is_empty());
    for line in trace.lines() {
        let record: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(record["method"], "mixann");
        assert!(record["reward"].is_number());
    }
}

#[test]
fn ablation_report_validates_and_has_four_rows() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), tiny_config_body());
    let out = dir.path().join("out");
    let status = Command::new(bin())
        .args(["ablation", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let validator = compiled_schema();
    let errors: Vec<String> = validator.iter_errors(&report).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema violations: {errors:?}");

    let results = report["results"].as_array().unwrap();
    assert_eq!(results.len(), 4);
    let modes: Vec<&str> = results.iter().map(|r| r["mode"].as_str().unwrap()).collect();
    assert_eq!(modes, ["full", "random", "no_improvement", "no_exploration"]);
}

#[test]
fn malformed_config_names_the_offending_key() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{
            "dataset": {"kind": "toy", "majority": 60, "minority": 12, "clusters": 2, "spread": 1.0},
            "split": {"test_fraction": 0.2, "val_fraction_of_train": 0.2},
            "methods": ["none"],
            "not_a_real_option": true
        }"#,
    );
    let output = Command::new(bin())
        .args(["benchmark", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("not_a_real_option"), "stderr: {stderr}");
}

#[test]
fn missing_config_file_fails() {
    let output = Command::new(bin())
        .args(["benchmark", "--config", "/nonexistent/config.json"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("file not found"));
}

#[test]
fn case_study_rejects_non_2d_data() {
    let dir = tempfile::tempdir().unwrap();
    // Five-feature CSV dataset.
    let csv_path = dir.path().join("data.csv");
    let mut rows = String::from("f1,f2,f3,f4,f5,label\n");
    for i in 0..40 {
        let label = u8::from(i % 8 == 0);
        rows.push_str(&format!("{0}.0,{0}.5,1.0,2.0,3.0,{1}\n", i, label));
    }
    std::fs::write(&csv_path, rows).unwrap();
    let config = write_config(
        dir.path(),
        &format!(
            r#"{{
                "dataset": {{"kind": "csv", "path": {:?}}},
                "split": {{"test_fraction": 0.2, "val_fraction_of_train": 0.2}},
                "methods": ["none"],
                "seeds": [0]
            }}"#,
            csv_path.to_str().unwrap()
        ),
    );
    let output = Command::new(bin())
        .args(["case-study", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("dimension mismatch"));
}

#[test]
fn sweep_writes_entries_for_each_value() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), tiny_config_body());
    let out = dir.path().join("out");
    let status = Command::new(bin())
        .args([
            "sweep",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--param",
            "K",
            "--values",
            "5,10,15,20,25",
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(report["parameter"], "K");
    let entries = report["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 5);
    assert_eq!(entries[0]["value"], 5.0);
    for entry in entries {
        let f1 = entry["mean"]["f1"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&f1));
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), tiny_config_body());
    let out_serial = dir.path().join("serial");
    let out_parallel = dir.path().join("parallel");
    for (out, jobs) in [(&out_serial, "1"), (&out_parallel, "4")] {
        let status = Command::new(bin())
            .args([
                "benchmark",
                "--config",
                config.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--jobs",
                jobs,
            ])
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(
        std::fs::read(out_serial.join("report.json")).unwrap(),
        std::fs::read(out_parallel.join("report.json")).unwrap()
    );
}

#[test]
fn seed_offset_shifts_the_seed_list() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), tiny_config_body());
    let out = dir.path().join("out");
    let status = Command::new(bin())
        .args([
            "benchmark",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed-offset",
            "100",
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["seeds"], serde_json::json!([100, 101]));
}
