//! Column standardization to zero mean and unit standard deviation
//! (population convention). Constant columns are flagged and map to zero.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::TableError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerModel {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub constant: Vec<bool>,
}

pub fn fit_scaler(data: ArrayView2<'_, f64>) -> Result<ScalerModel, TableError> {
    let n = data.nrows();
    if n == 0 {
        return Err(TableError::EmptyTable);
    }
    let mut means = Vec::with_capacity(data.ncols());
    let mut stds = Vec::with_capacity(data.ncols());
    let mut constant = Vec::with_capacity(data.ncols());
    for col in data.columns() {
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        means.push(mean);
        stds.push(std);
        constant.push(std == 0.0);
    }
    Ok(ScalerModel {
        means,
        stds,
        constant,
    })
}

pub fn apply_scaler(model: &ScalerModel, data: ArrayView2<'_, f64>) -> Result<Array2<f64>, TableError> {
    if data.ncols() != model.means.len() {
        return Err(TableError::WidthMismatch {
            expected: model.means.len(),
            found: data.ncols(),
        });
    }
    let mut out = data.to_owned();
    for (c, mut col) in out.columns_mut().into_iter().enumerate() {
        if model.constant[c] {
            col.fill(0.0);
        } else {
            col.mapv_inplace(|v| (v - model.means[c]) / model.stds[c]);
        }
    }
    Ok(out)
}
