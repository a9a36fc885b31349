//! Batch driver: `extract` features from a case manifest, `train` the
//! pipeline on a features CSV and `evaluate` a stored model.
//!
//! Exit codes: 0 success, 1 invalid input (with a diagnostic naming the
//! failed stage), 2 when extraction skipped at least one case.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use thiserror::Error;

use crate::features::extract_all;
use crate::pipeline::{
    evaluate_model, render_evaluate_report, render_train_report, report_to_json, train_pipeline,
    PipelineConfig, PipelineModel,
};
use crate::tabular::FeatureTable;
use crate::volume::{read_mask, read_volume};

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing required column `{0}`")]
    MissingColumn(&'static str),
    #[error("manifest has no rows")]
    Empty,
    #[error("row {row}: duplicate case id `{case_id}`")]
    DuplicateCaseId { row: usize, case_id: String },
    #[error("row {row}: {message}")]
    BadField { row: usize, message: String },
}

/// One extraction job: where the image/mask live, which label marks the ROI
/// and the case's class label.
#[derive(Debug, Clone)]
pub struct ManifestRow {
    pub case_id: String,
    pub image_path: PathBuf,
    pub mask_path: PathBuf,
    pub roi_label: u32,
    pub class_label: u8,
}

/// Manifest CSV columns: `case_id,image_path,mask_path,roi_label,label`.
pub fn read_manifest<P: AsRef<Path>>(path: P) -> Result<Vec<ManifestRow>, ManifestError> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    let header = reader.headers()?.clone();
    let col = |name: &'static str| -> Result<usize, ManifestError> {
        header
            .iter()
            .position(|h| h == name)
            .ok_or(ManifestError::MissingColumn(name))
    };
    let id_col = col("case_id")?;
    let image_col = col("image_path")?;
    let mask_col = col("mask_path")?;
    let roi_col = col("roi_label")?;
    let label_col = col("label")?;

    let mut rows = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 2;
        let record = record?;
        let case_id = record[id_col].to_string();
        if !seen.insert(case_id.clone()) {
            return Err(ManifestError::DuplicateCaseId { row, case_id });
        }
        let roi_label: u32 = record[roi_col].trim().parse().map_err(|_| {
            ManifestError::BadField {
                row,
                message: format!("roi_label {:?} is not a non-negative integer", &record[roi_col]),
            }
        })?;
        if roi_label == 0 {
            return Err(ManifestError::BadField {
                row,
                message: "roi_label must be >= 1".into(),
            });
        }
        let class_label = match record[label_col].trim() {
            "0" => 0u8,
            "1" => 1u8,
            other => {
                return Err(ManifestError::BadField {
                    row,
                    message: format!("label {other:?} is not 0 or 1"),
                })
            }
        };
        rows.push(ManifestRow {
            case_id,
            image_path: PathBuf::from(&record[image_col]),
            mask_path: PathBuf::from(&record[mask_col]),
            roi_label,
            class_label,
        });
    }
    if rows.is_empty() {
        return Err(ManifestError::Empty);
    }
    Ok(rows)
}

#[derive(Parser, Debug)]
#[command(
    name = "radiomx",
    about = "Radiomic feature extraction and 1p/19q codeletion classification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Extract the 120-feature vector for every case in a manifest.
    Extract {
        /// Manifest CSV: case_id,image_path,mask_path,roi_label,label
        #[arg(long)]
        manifest: PathBuf,
        /// Pipeline config JSON (defaults apply when omitted)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output features CSV
        #[arg(long)]
        out: PathBuf,
    },
    /// Split, standardize, reduce, balance and train; write model + report.
    Train {
        /// Features CSV produced by `extract`
        #[arg(long)]
        features: PathBuf,
        /// Pipeline config JSON (defaults apply when omitted)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output model JSON
        #[arg(long, value_name = "MODEL")]
        model_out: PathBuf,
        /// Output report JSON
        #[arg(long, value_name = "REPORT")]
        report_out: PathBuf,
    },
    /// Apply a stored model to a features CSV; nothing is refitted.
    Evaluate {
        /// Model JSON produced by `train`
        #[arg(long)]
        model: PathBuf,
        /// Features CSV to score
        #[arg(long)]
        features: PathBuf,
        /// Output report JSON
        #[arg(long, value_name = "REPORT")]
        report_out: PathBuf,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<PipelineConfig, String> {
    match path {
        None => Ok(PipelineConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| format!("stage config: cannot read {}: {e}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("stage config: {e}"))
        }
    }
}

pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Extract {
            manifest,
            config,
            out,
        } => cmd_extract(&manifest, &config, &out),
        Command::Train {
            features,
            config,
            model_out,
            report_out,
        } => cmd_train(&features, &config, &model_out, &report_out),
        Command::Evaluate {
            model,
            features,
            report_out,
        } => cmd_evaluate(&model, &features, &report_out),
    }
}

pub fn cmd_extract(manifest_path: &Path, config_path: &Option<PathBuf>, out: &Path) -> i32 {
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return 1;
        }
    };
    let rows = match read_manifest(manifest_path) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("stage manifest: {e}");
            return 1;
        }
    };

    // Cases are independent; extract them in parallel, keeping manifest order.
    let results: Vec<Result<(ManifestRow, crate::features::FeatureVector), (String, String)>> =
        rows.into_par_iter()
            .map(|row| {
                let extract = || -> Result<crate::features::FeatureVector, String> {
                    let img =
                        read_volume(&row.image_path).map_err(|e| format!("image: {e}"))?;
                    let mask = read_mask(&row.mask_path).map_err(|e| format!("mask: {e}"))?;
                    extract_all(&img, &mask, row.roi_label, config.bin)
                        .map_err(|e| e.to_string())
                };
                match extract() {
                    Ok(fv) => Ok((row, fv)),
                    Err(e) => Err((row.case_id, e)),
                }
            })
            .collect();

    let mut case_ids = Vec::new();
    let mut labels = Vec::new();
    let mut feature_names: Option<Vec<String>> = None;
    let mut values = Vec::new();
    let mut skipped = 0usize;
    for result in results {
        match result {
            Ok((row, fv)) => {
                if feature_names.is_none() {
                    feature_names = Some(fv.names.clone());
                }
                case_ids.push(row.case_id);
                labels.push(row.class_label);
                values.extend(fv.values);
            }
            Err((case_id, message)) => {
                eprintln!("case {case_id}: skipped: {message}");
                skipped += 1;
            }
        }
    }

    let Some(feature_names) = feature_names else {
        eprintln!("all cases failed; nothing to write");
        return 2;
    };
    let matrix = ndarray::Array2::from_shape_vec(
        (case_ids.len(), feature_names.len()),
        values,
    )
    .expect("each case contributes one full feature row");
    let table = match FeatureTable::new(case_ids, feature_names, matrix, labels) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("stage table: {e}");
            return 1;
        }
    };
    if let Err(e) = table.write_csv_path(out) {
        eprintln!("stage write: {e}");
        return 1;
    }
    println!(
        "extracted {} case(s) x {} features -> {}",
        table.n_rows(),
        table.n_features(),
        out.display()
    );
    if skipped > 0 {
        eprintln!("{skipped} case(s) skipped");
        2
    } else {
        0
    }
}

pub fn cmd_train(
    features: &Path,
    config_path: &Option<PathBuf>,
    model_out: &Path,
    report_out: &Path,
) -> i32 {
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return 1;
        }
    };
    let table = match FeatureTable::read_csv_path(features) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("stage csv-parse: {e}");
            return 1;
        }
    };
    let (model, report) = match train_pipeline(&table, &config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return 1;
        }
    };
    if let Err(e) = model.save(model_out) {
        eprintln!("stage model-io: {e}");
        return 1;
    }
    let json = match report_to_json(&report) {
        Ok(j) => j,
        Err(e) => {
            eprintln!("stage report-io: {e}");
            return 1;
        }
    };
    if let Err(e) = std::fs::write(report_out, json) {
        eprintln!("stage report-io: {e}");
        return 1;
    }
    print!("{}", render_train_report(&report));
    println!("model -> {}", model_out.display());
    println!("report -> {}", report_out.display());
    0
}

pub fn cmd_evaluate(model_path: &Path, features: &Path, report_out: &Path) -> i32 {
    let model = match PipelineModel::load(model_path) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("stage model-io: {e}");
            return 1;
        }
    };
    let table = match FeatureTable::read_csv_path(features) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("stage csv-parse: {e}");
            return 1;
        }
    };
    let report = match evaluate_model(&model, &table) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return 1;
        }
    };
    let json = match report_to_json(&report) {
        Ok(j) => j,
        Err(e) => {
            eprintln!("stage report-io: {e}");
            return 1;
        }
    };
    if let Err(e) = std::fs::write(report_out, json) {
        eprintln!("stage report-io: {e}");
        return 1;
    }
    print!("{}", render_evaluate_report(&report));
    println!("report -> {}", report_out.display());
    0
}
