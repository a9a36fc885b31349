//! Principal component analysis via eigendecomposition of the column
//! covariance matrix (population convention).
//!
//! Component signs are fixed so that each component's largest-magnitude
//! entry is positive, which makes fitted models reproducible.

use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::TableError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub k: usize,
    /// Column means used for centering.
    pub means: Vec<f64>,
    /// k orthonormal direction vectors, one per row (k x d).
    pub components: Vec<Vec<f64>>,
    /// Fraction of total variance captured per retained component.
    pub explained_variance_ratio: Vec<f64>,
}

impl PcaModel {
    pub fn components_matrix(&self) -> Array2<f64> {
        let d = self.means.len();
        let mut m = Array2::zeros((self.k, d));
        for (r, comp) in self.components.iter().enumerate() {
            for (c, &v) in comp.iter().enumerate() {
                m[[r, c]] = v;
            }
        }
        m
    }
}

pub fn fit_pca(data: ArrayView2<'_, f64>, k: usize) -> Result<PcaModel, TableError> {
    let (n, d) = data.dim();
    if n < 2 {
        return Err(TableError::EmptyTable);
    }
    let max_k = (n - 1).min(d);
    if k == 0 || k > max_k {
        return Err(TableError::InvalidK {
            k,
            max: max_k,
            rows: n,
            cols: d,
        });
    }

    let means: Vec<f64> = data
        .columns()
        .into_iter()
        .map(|c| c.sum() / n as f64)
        .collect();
    let mut centered = data.to_owned();
    for (c, mut col) in centered.columns_mut().into_iter().enumerate() {
        col.mapv_inplace(|v| v - means[c]);
    }

    // Population covariance, d x d.
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for a in 0..d {
        for b in a..d {
            let s = centered
                .column(a)
                .iter()
                .zip(centered.column(b).iter())
                .map(|(x, y)| x * y)
                .sum::<f64>()
                / n as f64;
            cov[(a, b)] = s;
            cov[(b, a)] = s;
        }
    }

    let eig = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());

    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let total: f64 = eigenvalues.iter().sum();

    let mut components = Vec::with_capacity(k);
    for &col in order.iter().take(k) {
        let mut v: Vec<f64> = eig.eigenvectors.column(col).iter().copied().collect();
        // Deterministic sign: largest-magnitude entry is positive.
        let lead = v
            .iter()
            .cloned()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        if v[lead] < 0.0 {
            for x in &mut v {
                *x = -*x;
            }
        }
        components.push(v);
    }

    let explained_variance_ratio = eigenvalues
        .iter()
        .take(k)
        .map(|&l| if total > 0.0 { l / total } else { 0.0 })
        .collect();

    Ok(PcaModel {
        k,
        means,
        components,
        explained_variance_ratio,
    })
}

/// Project data onto the retained components: (X - mean) * components^T.
pub fn apply_pca(model: &PcaModel, data: ArrayView2<'_, f64>) -> Result<Array2<f64>, TableError> {
    let d = model.means.len();
    if data.ncols() != d {
        return Err(TableError::WidthMismatch {
            expected: d,
            found: data.ncols(),
        });
    }
    let mut centered = data.to_owned();
    for (c, mut col) in centered.columns_mut().into_iter().enumerate() {
        col.mapv_inplace(|v| v - model.means[c]);
    }
    Ok(centered.dot(&model.components_matrix().t()))
}
