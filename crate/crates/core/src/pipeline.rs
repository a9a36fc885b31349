//! End-to-end pipeline: split -> standardize -> PCA -> SMOTE -> MLP, with a
//! persisted model document and machine/human-readable reports.
//!
//! The fit order is deliberate: the scaler and PCA are fitted on the
//! training partition only, and SMOTE balances only the training rows after
//! projection, so no test-set information leaks into the fitted model.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{confusion_matrix, metrics, ConfusionMatrix, MetricsReport};
use crate::mlp::{self, MlpModel, TrainConfig, TrainHistory};
use crate::roi::BinSpec;
use crate::tabular::{
    apply_pca, apply_scaler, fit_pca, fit_scaler, smote, stratified_split, FeatureTable,
    PcaModel, ScalerModel, SmoteConfig,
};

pub const MODEL_FORMAT_VERSION: &str = "radiomx.model.v1";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("stage {stage}: {message}")]
    Stage {
        stage: &'static str,
        message: String,
    },
    #[error("model format version mismatch: expected {expected}, found {found}")]
    ModelVersionMismatch { expected: String, found: String },
    #[error("feature columns do not match the model schema (missing: {missing:?}, unexpected: {extra:?})")]
    FeatureNameMismatch {
        missing: Vec<String>,
        extra: Vec<String>,
    },
    #[error("model document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn stage_err(stage: &'static str, err: impl std::fmt::Display) -> PipelineError {
    PipelineError::Stage {
        stage,
        message: err.to_string(),
    }
}

/// All pipeline parameters. Randomness flows from exactly two seeds:
/// `data_seed` (split and SMOTE) and `train.seed` (weight init and shuffle).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub bin: BinSpec,
    pub pca_k: usize,
    pub test_fraction: f64,
    pub data_seed: u64,
    pub smote_k: usize,
    pub train: TrainConfig,
    pub threshold: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            bin: BinSpec::default(),
            pca_k: 8,
            test_fraction: 0.25,
            data_seed: 42,
            smote_k: 5,
            train: TrainConfig::default(),
            threshold: 0.5,
        }
    }
}

/// Serializable MLP parameters (nested arrays).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpDocument {
    pub layer_sizes: Vec<usize>,
    pub activations: Vec<String>,
    pub weights: Vec<Vec<Vec<f64>>>,
    pub biases: Vec<Vec<f64>>,
}

impl MlpDocument {
    fn from_model(model: &MlpModel) -> Self {
        let mut activations: Vec<String> = vec!["relu".into(); model.weights.len()];
        *activations.last_mut().unwrap() = "sigmoid".into();
        Self {
            layer_sizes: model.layer_sizes(),
            activations,
            weights: model
                .weights
                .iter()
                .map(|w| w.rows().into_iter().map(|r| r.to_vec()).collect())
                .collect(),
            biases: model.biases.iter().map(|b| b.to_vec()).collect(),
        }
    }

    fn to_model(&self) -> Result<MlpModel, PipelineError> {
        let mut weights = Vec::with_capacity(self.weights.len());
        for (l, rows) in self.weights.iter().enumerate() {
            let n_out = rows.len();
            let n_in = rows.first().map_or(0, Vec::len);
            if rows.iter().any(|r| r.len() != n_in) {
                return Err(stage_err("model-io", format!("ragged weight matrix in layer {l}")));
            }
            let flat: Vec<f64> = rows.iter().flatten().copied().collect();
            weights.push(
                Array2::from_shape_vec((n_out, n_in), flat)
                    .map_err(|e| stage_err("model-io", e))?,
            );
        }
        let biases = self.biases.iter().map(|b| Array1::from_vec(b.clone())).collect();
        Ok(MlpModel { weights, biases })
    }
}

/// The fitted pipeline persisted as one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineModel {
    pub format_version: String,
    pub config: PipelineConfig,
    /// Feature schema the scaler/PCA were fitted on, in column order.
    pub feature_names: Vec<String>,
    pub scaler: ScalerModel,
    pub pca: PcaModel,
    pub mlp: MlpDocument,
}

impl PipelineModel {
    pub fn to_json(&self) -> Result<String, PipelineError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        // Check the version before strict decoding so old documents fail
        // with the dedicated error instead of a shape mismatch.
        #[derive(Deserialize)]
        struct VersionProbe {
            format_version: String,
        }
        let probe: VersionProbe = serde_json::from_str(text)?;
        if probe.format_version != MODEL_FORMAT_VERSION {
            return Err(PipelineError::ModelVersionMismatch {
                expected: MODEL_FORMAT_VERSION.to_string(),
                found: probe.format_version,
            });
        }
        Ok(serde_json::from_str(text)?)
    }

    pub fn save<P: AsRef<std::path::Path>>(&self, path: P) -> Result<(), PipelineError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load<P: AsRef<std::path::Path>>(path: P) -> Result<Self, PipelineError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Reorder `table` columns to the model schema; the column sets must
    /// match exactly (order-insensitive).
    fn align_columns(&self, table: &FeatureTable) -> Result<Array2<f64>, PipelineError> {
        let missing: Vec<String> = self
            .feature_names
            .iter()
            .filter(|n| !table.feature_names.contains(n))
            .cloned()
            .collect();
        let extra: Vec<String> = table
            .feature_names
            .iter()
            .filter(|n| !self.feature_names.contains(n))
            .cloned()
            .collect();
        if !missing.is_empty() || !extra.is_empty() {
            return Err(PipelineError::FeatureNameMismatch { missing, extra });
        }
        let positions: Vec<usize> = self
            .feature_names
            .iter()
            .map(|n| {
                table
                    .feature_names
                    .iter()
                    .position(|t| t == n)
                    .expect("column checked present")
            })
            .collect();
        Ok(table.matrix.select(ndarray::Axis(1), &positions))
    }

    /// Apply the stored scaler -> PCA -> MLP to a feature table.
    pub fn predict_table(
        &self,
        table: &FeatureTable,
    ) -> Result<(Vec<u8>, Vec<f64>), PipelineError> {
        let matrix = self.align_columns(table)?;
        let scaled =
            apply_scaler(&self.scaler, matrix.view()).map_err(|e| stage_err("scaler", e))?;
        let projected = apply_pca(&self.pca, scaled.view()).map_err(|e| stage_err("pca", e))?;
        let model = self.mlp.to_model()?;
        let probs = mlp::forward(&model, projected.view()).map_err(|e| stage_err("mlp", e))?;
        let labels = probs.iter().map(|&p| u8::from(p >= self.config.threshold)).collect();
        Ok((labels, probs.to_vec()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoteCounts {
    pub train_positive_before: usize,
    pub train_negative_before: usize,
    pub synthetic_added: usize,
    pub train_rows_after: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub cases: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsReport,
}

/// Everything `cmd_train` reports: variance percentages, SMOTE counts,
/// epoch history and the held-out test outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub generated_at: String,
    pub train_cases: usize,
    pub test_cases: usize,
    pub explained_variance_pct: Vec<f64>,
    pub smote: SmoteCounts,
    pub history: Vec<EpochRecord>,
    pub test: TestOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateReport {
    pub generated_at: String,
    pub cases: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsReport,
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Fit the whole pipeline on `table` and evaluate on the held-out split.
pub fn train_pipeline(
    table: &FeatureTable,
    config: &PipelineConfig,
) -> Result<(PipelineModel, TrainReport), PipelineError> {
    let (train_table, test_table) =
        stratified_split(table, config.test_fraction, config.data_seed)
            .map_err(|e| stage_err("split", e))?;

    let scaler =
        fit_scaler(train_table.matrix.view()).map_err(|e| stage_err("scaler", e))?;
    let train_scaled = apply_scaler(&scaler, train_table.matrix.view())
        .map_err(|e| stage_err("scaler", e))?;

    let pca = fit_pca(train_scaled.view(), config.pca_k).map_err(|e| stage_err("pca", e))?;
    let train_projected =
        apply_pca(&pca, train_scaled.view()).map_err(|e| stage_err("pca", e))?;

    let pc_names: Vec<String> = (1..=config.pca_k).map(|i| format!("PC{i}")).collect();
    let projected_table = train_table.with_matrix(pc_names, train_projected);

    let before_pos = projected_table.class_count(1);
    let before_neg = projected_table.class_count(0);
    let balanced = smote(
        &projected_table,
        &SmoteConfig {
            k_neighbors: config.smote_k,
            seed: config.data_seed,
        },
    )
    .map_err(|e| stage_err("smote", e))?;
    let smote_counts = SmoteCounts {
        train_positive_before: before_pos,
        train_negative_before: before_neg,
        synthetic_added: balanced.n_rows() - projected_table.n_rows(),
        train_rows_after: balanced.n_rows(),
    };

    let mut net = MlpModel::init(config.pca_k, config.train.seed);
    let history = mlp::train(
        &mut net,
        balanced.matrix.view(),
        &balanced.labels,
        &config.train,
    )
    .map_err(|e| stage_err("train", e))?;

    let model = PipelineModel {
        format_version: MODEL_FORMAT_VERSION.to_string(),
        config: config.clone(),
        feature_names: table.feature_names.clone(),
        scaler,
        pca,
        mlp: MlpDocument::from_model(&net),
    };

    let (predicted, _) = model.predict_table(&test_table)?;
    let cm = confusion_matrix(&predicted, &test_table.labels)
        .map_err(|e| stage_err("evaluate", e))?;

    let report = TrainReport {
        generated_at: timestamp(),
        train_cases: train_table.n_rows(),
        test_cases: test_table.n_rows(),
        explained_variance_pct: model
            .pca
            .explained_variance_ratio
            .iter()
            .map(|r| r * 100.0)
            .collect(),
        smote: smote_counts,
        history: history_records(&history),
        test: TestOutcome {
            cases: test_table.n_rows(),
            confusion: cm,
            metrics: metrics(&cm),
        },
    };
    Ok((model, report))
}

fn history_records(history: &TrainHistory) -> Vec<EpochRecord> {
    history
        .loss
        .iter()
        .zip(&history.accuracy)
        .enumerate()
        .map(|(i, (&loss, &accuracy))| EpochRecord {
            epoch: i + 1,
            loss,
            accuracy,
        })
        .collect()
}

/// Apply a stored model to a feature table; nothing is refitted.
pub fn evaluate_model(
    model: &PipelineModel,
    table: &FeatureTable,
) -> Result<EvaluateReport, PipelineError> {
    let (predicted, _) = model.predict_table(table)?;
    let cm = confusion_matrix(&predicted, &table.labels)
        .map_err(|e| stage_err("evaluate", e))?;
    Ok(EvaluateReport {
        generated_at: timestamp(),
        cases: table.n_rows(),
        confusion: cm,
        metrics: metrics(&cm),
    })
}

fn pct(v: Option<f64>) -> String {
    match v {
        Some(f) => format!("{:.1}%", f * 100.0),
        None => "n/a".to_string(),
    }
}

fn confusion_text(cm: &ConfusionMatrix, m: &MetricsReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("test cases = {}\n", cm.total()));
    out.push_str("                         codeleted (real)   non-codeleted (real)\n");
    out.push_str(&format!(
        "codeleted (predicted)     {:>8}           {:>8}\n",
        cm.tp, cm.fp
    ));
    out.push_str(&format!(
        "non-codeleted (predicted) {:>8}           {:>8}\n",
        cm.fn_, cm.tn
    ));
    out.push_str(&format!(
        "precision {}  specificity {}  sensitivity {}  accuracy {}\n",
        pct(m.precision),
        pct(m.specificity),
        pct(m.sensitivity),
        pct(m.accuracy)
    ));
    out
}

/// Human-readable rendering of a training report.
pub fn render_train_report(report: &TrainReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "split: {} train / {} test\n",
        report.train_cases, report.test_cases
    ));
    let pcs: Vec<String> = report
        .explained_variance_pct
        .iter()
        .enumerate()
        .map(|(i, p)| format!("PCA{}={:.1}", i + 1, p))
        .collect();
    out.push_str(&format!(
        "explained variance (%): {} (total {:.1}%)\n",
        pcs.join(", "),
        report.explained_variance_pct.iter().sum::<f64>()
    ));
    out.push_str(&format!(
        "smote: {} positive / {} negative -> +{} synthetic -> {} rows\n",
        report.smote.train_positive_before,
        report.smote.train_negative_before,
        report.smote.synthetic_added,
        report.smote.train_rows_after
    ));
    if let (Some(first), Some(last)) = (report.history.first(), report.history.last()) {
        out.push_str(&format!(
            "training: epoch {} accuracy {:.1}% loss {:.4} -> epoch {} accuracy {:.1}% loss {:.4}\n",
            first.epoch,
            first.accuracy * 100.0,
            first.loss,
            last.epoch,
            last.accuracy * 100.0,
            last.loss
        ));
    }
    out.push_str(&confusion_text(&report.test.confusion, &report.test.metrics));
    out
}

/// Human-readable rendering of an evaluation report.
pub fn render_evaluate_report(report: &EvaluateReport) -> String {
    confusion_text(&report.confusion, &report.metrics)
}

pub fn report_to_json<T: Serialize>(report: &T) -> Result<String, PipelineError> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    Ok(text)
}
