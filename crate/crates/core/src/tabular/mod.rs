//! Feature-table preparation: CSV container, standardization, PCA reduction,
//! stratified splitting and SMOTE balancing.

pub mod pca;
pub mod scaler;
pub mod smote;
pub mod split;

pub use pca::{apply_pca, fit_pca, PcaModel};
pub use scaler::{apply_scaler, fit_scaler, ScalerModel};
pub use smote::{smote, SmoteConfig};
pub use split::stratified_split;

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, Axis};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("table has no rows")]
    EmptyTable,
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("missing required column `{0}`")]
    MissingColumn(&'static str),
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("duplicate case id `{0}`")]
    DuplicateCaseId(String),
    #[error("case {case_id}: label {label:?} is not 0 or 1")]
    NonBinaryLabel { case_id: String, label: String },
    #[error("case {case_id}, column {column}: value {value:?} is not a finite number")]
    BadValue {
        case_id: String,
        column: String,
        value: String,
    },
    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("class {label} has too few cases ({count}) for test fraction {fraction}")]
    ClassTooSmall {
        label: u8,
        count: usize,
        fraction: f64,
    },
    #[error("minority class has {minority} cases; k_neighbors {k} requires at least {} cases", k + 1)]
    MinorityTooSmall { minority: usize, k: usize },
    #[error("k = {k} exceeds the maximum {max} for {rows} rows x {cols} columns")]
    InvalidK {
        k: usize,
        max: usize,
        rows: usize,
        cols: usize,
    },
    #[error("expected {expected} feature columns, found {found}")]
    WidthMismatch { expected: usize, found: usize },
}

/// Cases x features with binary labels (1 = codeleted, the positive class).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub case_ids: Vec<String>,
    pub feature_names: Vec<String>,
    pub matrix: Array2<f64>,
    pub labels: Vec<u8>,
}

impl FeatureTable {
    pub fn new(
        case_ids: Vec<String>,
        feature_names: Vec<String>,
        matrix: Array2<f64>,
        labels: Vec<u8>,
    ) -> Result<Self, TableError> {
        if case_ids.is_empty() {
            return Err(TableError::EmptyTable);
        }
        assert_eq!(case_ids.len(), matrix.nrows());
        assert_eq!(case_ids.len(), labels.len());
        assert_eq!(feature_names.len(), matrix.ncols());
        let mut seen = std::collections::HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.clone()) {
                return Err(TableError::DuplicateColumn(name.clone()));
            }
        }
        let mut ids = std::collections::HashSet::new();
        for id in &case_ids {
            if !ids.insert(id.clone()) {
                return Err(TableError::DuplicateCaseId(id.clone()));
            }
        }
        for (row, id) in case_ids.iter().enumerate() {
            if labels[row] > 1 {
                return Err(TableError::NonBinaryLabel {
                    case_id: id.clone(),
                    label: labels[row].to_string(),
                });
            }
            for (col, v) in matrix.row(row).iter().enumerate() {
                if !v.is_finite() {
                    return Err(TableError::BadValue {
                        case_id: id.clone(),
                        column: feature_names[col].clone(),
                        value: v.to_string(),
                    });
                }
            }
        }
        Ok(Self {
            case_ids,
            feature_names,
            matrix,
            labels,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn class_count(&self, label: u8) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Row subset in the given index order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        Self {
            case_ids: indices.iter().map(|&i| self.case_ids[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
            matrix: self.matrix.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Same rows with a different feature matrix (e.g. after scaling or PCA).
    pub fn with_matrix(&self, feature_names: Vec<String>, matrix: Array2<f64>) -> Self {
        assert_eq!(matrix.nrows(), self.n_rows());
        assert_eq!(feature_names.len(), matrix.ncols());
        Self {
            case_ids: self.case_ids.clone(),
            feature_names,
            matrix,
            labels: self.labels.clone(),
        }
    }

    /// Serialize as CSV: header `case_id,<features...>,label`, floats with 17
    /// significant digits so values round-trip bit-exactly.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), TableError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = Vec::with_capacity(self.n_features() + 2);
        header.push("case_id".to_string());
        header.extend(self.feature_names.iter().cloned());
        header.push("label".to_string());
        w.write_record(&header)?;
        for row in 0..self.n_rows() {
            let mut record = Vec::with_capacity(self.n_features() + 2);
            record.push(self.case_ids[row].clone());
            for v in self.matrix.row(row) {
                record.push(format!("{v:.16e}"));
            }
            record.push(self.labels[row].to_string());
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_path<P: AsRef<Path>>(&self, path: P) -> Result<(), TableError> {
        let file = std::fs::File::create(path)?;
        self.write_csv(file)
    }

    /// Parse a feature-table CSV. The `case_id` and `label` columns are
    /// located by name; every other column is a feature, kept in file order.
    pub fn read_csv<R: Read>(input: R) -> Result<Self, TableError> {
        let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
        let header = reader.headers()?.clone();
        let columns: Vec<String> = header.iter().map(str::to_string).collect();
        let id_col = columns
            .iter()
            .position(|c| c == "case_id")
            .ok_or(TableError::MissingColumn("case_id"))?;
        let label_col = columns
            .iter()
            .position(|c| c == "label")
            .ok_or(TableError::MissingColumn("label"))?;
        let feature_cols: Vec<usize> = (0..columns.len())
            .filter(|&c| c != id_col && c != label_col)
            .collect();
        let feature_names: Vec<String> =
            feature_cols.iter().map(|&c| columns[c].clone()).collect();

        let mut case_ids = Vec::new();
        let mut labels = Vec::new();
        let mut values = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != columns.len() {
                return Err(TableError::RaggedRow {
                    row: row + 2,
                    found: record.len(),
                    expected: columns.len(),
                });
            }
            let case_id = record[id_col].to_string();
            let label_text = record[label_col].trim();
            let label = match label_text {
                "0" => 0u8,
                "1" => 1u8,
                other => {
                    return Err(TableError::NonBinaryLabel {
                        case_id,
                        label: other.to_string(),
                    })
                }
            };
            for &c in &feature_cols {
                let text = record[c].trim();
                let v: f64 = text.parse().map_err(|_| TableError::BadValue {
                    case_id: case_id.clone(),
                    column: columns[c].clone(),
                    value: text.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(TableError::BadValue {
                        case_id: case_id.clone(),
                        column: columns[c].clone(),
                        value: text.to_string(),
                    });
                }
                values.push(v);
            }
            case_ids.push(case_id);
            labels.push(label);
        }
        if case_ids.is_empty() {
            return Err(TableError::EmptyTable);
        }
        let matrix = Array2::from_shape_vec((case_ids.len(), feature_names.len()), values)
            .expect("row-major values match the parsed shape");
        Self::new(case_ids, feature_names, matrix, labels)
    }

    pub fn read_csv_path<P: AsRef<Path>>(path: P) -> Result<Self, TableError> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(file)
    }
}
