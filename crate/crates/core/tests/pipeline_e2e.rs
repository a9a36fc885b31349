//! End-to-end CLI flow on synthetic NRRD phantoms: extract -> train ->
//! evaluate, exit codes, and per-case independence of extraction.

mod common;

use std::fs;
use std::path::{Path, PathBuf};

use common::write_phantom_manifest;
use radiomx::cli::{cmd_evaluate, cmd_extract, cmd_train};
use radiomx::tabular::FeatureTable;

const N_CASES: usize = 24;

fn class_of(c: usize) -> u8 {
    u8::from(c % 2 == 0 || c % 5 == 0)
}

fn write_config(dir: &Path) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(
        &path,
        r#"{
  "bin": {"mode": "fixed-width", "width": 25.0},
  "pca_k": 8,
  "test_fraction": 0.25,
  "data_seed": 7,
  "smote_k": 3,
  "train": {"epochs": 40, "seed": 3},
  "threshold": 0.5
}
"#,
    )
    .unwrap();
    path
}

#[test]
fn extract_train_evaluate_flow() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_phantom_manifest(dir.path(), N_CASES, class_of);
    let config = Some(write_config(dir.path()));
    let features = dir.path().join("features.csv");

    assert_eq!(cmd_extract(&manifest, &config, &features), 0);
    let table = FeatureTable::read_csv_path(&features).unwrap();
    assert_eq!(table.n_rows(), N_CASES);
    assert_eq!(table.n_features(), 120);

    let model_out = dir.path().join("model.json");
    let report_out = dir.path().join("train_report.json");
    assert_eq!(cmd_train(&features, &config, &model_out, &report_out), 0);
    let model_json = fs::read_to_string(&model_out).unwrap();
    assert!(model_json.contains("radiomx.model.v1"));
    let report_json = fs::read_to_string(&report_out).unwrap();
    assert!(report_json.contains("explained_variance_pct"));
    assert!(report_json.contains("confusion"));

    let eval_out = dir.path().join("eval_report.json");
    assert_eq!(cmd_evaluate(&model_out, &features, &eval_out), 0);
    let eval_json = fs::read_to_string(&eval_out).unwrap();
    assert!(eval_json.contains("\"cases\": 24"));
}

#[test]
fn extraction_is_independent_of_manifest_row_order() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_phantom_manifest(dir.path(), 6, class_of);
    let features_a = dir.path().join("a.csv");
    assert_eq!(cmd_extract(&manifest, &None, &features_a), 0);

    // Reverse the manifest body.
    let text = fs::read_to_string(&manifest).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let header = lines.remove(0);
    lines.reverse();
    let reversed = dir.path().join("manifest_rev.csv");
    fs::write(&reversed, format!("{header}\n{}\n", lines.join("\n"))).unwrap();
    let features_b = dir.path().join("b.csv");
    assert_eq!(cmd_extract(&reversed, &None, &features_b), 0);

    let a = FeatureTable::read_csv_path(&features_a).unwrap();
    let b = FeatureTable::read_csv_path(&features_b).unwrap();
    assert_eq!(a.feature_names, b.feature_names);
    for (row, id) in a.case_ids.iter().enumerate() {
        let brow = b.case_ids.iter().position(|x| x == id).unwrap();
        assert_eq!(
            a.matrix.row(row),
            b.matrix.row(brow),
            "case {id} differs between manifest orders"
        );
        assert_eq!(a.labels[row], b.labels[brow]);
    }
}

#[test]
fn missing_image_skips_case_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_phantom_manifest(dir.path(), 4, class_of);
    // Point one case at a non-existent file.
    let text = fs::read_to_string(&manifest).unwrap();
    let patched = text.replace("case001.nrrd", "missing.nrrd");
    fs::write(&manifest, patched).unwrap();

    let features = dir.path().join("features.csv");
    assert_eq!(cmd_extract(&manifest, &None, &features), 2);
    let table = FeatureTable::read_csv_path(&features).unwrap();
    assert_eq!(table.n_rows(), 3, "the broken case is skipped, others kept");
    assert!(!table.case_ids.contains(&"case001".to_string()));
}

#[test]
fn empty_manifest_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("manifest.csv");
    fs::write(&manifest, "case_id,image_path,mask_path,roi_label,label\n").unwrap();
    let features = dir.path().join("features.csv");
    assert_eq!(cmd_extract(&manifest, &None, &features), 1);
    assert!(!features.exists());
}

#[test]
fn train_rejects_csv_without_label_column() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "case_id,f1\nc1,0.5\n").unwrap();
    let code = cmd_train(
        &bad,
        &None,
        &dir.path().join("m.json"),
        &dir.path().join("r.json"),
    );
    assert_eq!(code, 1);
}

#[test]
fn evaluate_rejects_wrong_model_version() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_phantom_manifest(dir.path(), 16, class_of);
    let config = Some(write_config(dir.path()));
    let features = dir.path().join("features.csv");
    assert_eq!(cmd_extract(&manifest, &config, &features), 0);
    let model_out = dir.path().join("model.json");
    let report_out = dir.path().join("report.json");
    assert_eq!(cmd_train(&features, &config, &model_out, &report_out), 0);

    let doctored = fs::read_to_string(&model_out)
        .unwrap()
        .replace("radiomx.model.v1", "radiomx.model.v9");
    fs::write(&model_out, doctored).unwrap();
    assert_eq!(cmd_evaluate(&model_out, &features, &report_out), 1);
}

#[test]
fn binary_runs_the_full_flow() {
    let exe = env!("CARGO_BIN_EXE_radiomx");
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_phantom_manifest(dir.path(), 16, class_of);
    let config = write_config(dir.path());
    let features = dir.path().join("features.csv");

    let status = std::process::Command::new(exe)
        .args(["extract", "--manifest"])
        .arg(&manifest)
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&features)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let model = dir.path().join("model.json");
    let report = dir.path().join("report.json");
    let status = std::process::Command::new(exe)
        .args(["train", "--features"])
        .arg(&features)
        .arg("--config")
        .arg(&config)
        .arg("--model-out")
        .arg(&model)
        .arg("--report-out")
        .arg(&report)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let eval_report = dir.path().join("eval.json");
    let status = std::process::Command::new(exe)
        .args(["evaluate", "--model"])
        .arg(&model)
        .arg("--features")
        .arg(&features)
        .arg("--report-out")
        .arg(&eval_report)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(eval_report.exists());
}
