//! SMOTE: balance the minority class by interpolating between each sampled
//! minority row and one of its k nearest minority neighbors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use ndarray::{Array2, Axis};

use super::{FeatureTable, TableError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    pub seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        Self {
            k_neighbors: 5,
            seed: 0,
        }
    }
}

/// Append synthetic minority rows until both classes have equal counts.
///
/// Each synthetic row is `x + u * (nbr - x)` with `x` a uniformly sampled
/// minority row, `nbr` one of its `k_neighbors` nearest minority rows by
/// Euclidean distance (ties broken by row index) and `u` uniform in [0, 1).
/// Original rows are untouched; the result is deterministic per seed.
pub fn smote(table: &FeatureTable, cfg: &SmoteConfig) -> Result<FeatureTable, TableError> {
    let n0 = table.class_count(0);
    let n1 = table.class_count(1);
    if n0 == 0 || n1 == 0 {
        return Err(TableError::ClassTooSmall {
            label: u8::from(n1 == 0),
            count: 0,
            fraction: 0.0,
        });
    }
    if n0 == n1 {
        return Ok(table.clone());
    }
    let minority_label = u8::from(n1 < n0);
    let minority: Vec<usize> = (0..table.n_rows())
        .filter(|&r| table.labels[r] == minority_label)
        .collect();
    let need = n0.abs_diff(n1);

    if cfg.k_neighbors == 0 || cfg.k_neighbors >= minority.len() {
        return Err(TableError::MinorityTooSmall {
            minority: minority.len(),
            k: cfg.k_neighbors,
        });
    }

    // k nearest minority neighbors per minority row, stable in (distance, index).
    let d = table.n_features();
    let neighbors: Vec<Vec<usize>> = minority
        .iter()
        .map(|&a| {
            let mut dist: Vec<(f64, usize)> = minority
                .iter()
                .filter(|&&b| b != a)
                .map(|&b| {
                    let d2 = table
                        .matrix
                        .row(a)
                        .iter()
                        .zip(table.matrix.row(b).iter())
                        .map(|(x, y)| (x - y).powi(2))
                        .sum::<f64>();
                    (d2, b)
                })
                .collect();
            dist.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(&y.1)));
            dist.into_iter()
                .take(cfg.k_neighbors)
                .map(|(_, b)| b)
                .collect()
        })
        .collect();

    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut synthetic = Array2::<f64>::zeros((need, d));
    for s in 0..need {
        let pick = rng.random_range(0..minority.len());
        let parent = minority[pick];
        let nbr = neighbors[pick][rng.random_range(0..cfg.k_neighbors)];
        let u: f64 = rng.random();
        for c in 0..d {
            let x = table.matrix[[parent, c]];
            let y = table.matrix[[nbr, c]];
            synthetic[[s, c]] = x + u * (y - x);
        }
    }

    let mut case_ids = table.case_ids.clone();
    case_ids.extend((1..=need).map(|i| format!("synthetic_{i:04}")));
    let mut labels = table.labels.clone();
    labels.extend(std::iter::repeat(minority_label).take(need));
    let matrix = ndarray::concatenate(Axis(0), &[table.matrix.view(), synthetic.view()])
        .expect("row counts and widths line up");
    FeatureTable::new(case_ids, table.feature_names.clone(), matrix, labels)
}
