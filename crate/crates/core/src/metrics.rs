//! Confusion matrix and the derived binary classification metrics.
//! The positive class is 1 (codeleted).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("predicted has {predicted} entries, actual has {actual}")]
    LengthMismatch { predicted: usize, actual: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        Self { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Count the four cells from aligned binary label vectors.
pub fn confusion_matrix(predicted: &[u8], actual: &[u8]) -> Result<ConfusionMatrix, MetricsError> {
    if predicted.len() != actual.len() {
        return Err(MetricsError::LengthMismatch {
            predicted: predicted.len(),
            actual: actual.len(),
        });
    }
    let mut cm = ConfusionMatrix::from_counts(0, 0, 0, 0);
    for (&p, &a) in predicted.iter().zip(actual) {
        match (p, a) {
            (1, 1) => cm.tp += 1,
            (1, 0) => cm.fp += 1,
            (0, 1) => cm.fn_ += 1,
            (0, 0) => cm.tn += 1,
            _ => unreachable!("labels are validated as binary"),
        }
    }
    Ok(cm)
}

/// Metric fractions; a metric whose denominator is zero is reported as
/// `None` rather than NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
}

pub fn metrics(cm: &ConfusionMatrix) -> MetricsReport {
    let ratio = |num: usize, den: usize| {
        if den > 0 {
            Some(num as f64 / den as f64)
        } else {
            None
        }
    };
    MetricsReport {
        sensitivity: ratio(cm.tp, cm.tp + cm.fn_),
        specificity: ratio(cm.tn, cm.tn + cm.fp),
        accuracy: ratio(cm.tp + cm.tn, cm.total()),
        precision: ratio(cm.tp, cm.tp + cm.fp),
    }
}
