//! Neighborhood gray-tone difference matrix (5 features).
//!
//! Per level i over the ROI: n_i is the voxel count, p_i = n_i / N, and s_i
//! sums |level - mean level of the valid 26-neighbors| over the voxels of
//! level i; voxels with no valid neighbor contribute 0.

use crate::features::{offsets_26, FeatureBlock, LevelGrid};
use crate::roi::DiscretizedRoi;

/// Coarseness is capped here when the weighted difference sum vanishes.
pub const COARSENESS_CAP: f64 = 1e6;

#[derive(Debug, Clone)]
pub struct NgtdmColumns {
    /// Voxel count per level (index = level - 1).
    pub n: Vec<f64>,
    /// Level probability per level.
    pub p: Vec<f64>,
    /// Summed absolute deviation from the neighborhood mean per level.
    pub s: Vec<f64>,
}

pub fn build_ngtdm(droi: &DiscretizedRoi) -> NgtdmColumns {
    let grid = LevelGrid::from_droi(droi);
    let ng = droi.ng as usize;
    let offsets = offsets_26();
    let total = grid.n_voxels() as f64;

    let mut n = vec![0.0f64; ng];
    let mut s = vec![0.0f64; ng];
    for (i, j, k, level) in grid.iter_voxels() {
        n[(level - 1) as usize] += 1.0;
        let mut sum = 0.0f64;
        let mut count = 0usize;
        for &(dx, dy, dz) in &offsets {
            let other = grid.level(i + i64::from(dx), j + i64::from(dy), k + i64::from(dz));
            if other != 0 {
                sum += f64::from(other);
                count += 1;
            }
        }
        if count > 0 {
            s[(level - 1) as usize] += (f64::from(level) - sum / count as f64).abs();
        }
    }
    let p = n.iter().map(|&c| c / total).collect();
    NgtdmColumns { n, p, s }
}

const NAMES: [&str; 5] = ["Coarseness", "Contrast", "Busyness", "Complexity", "Strength"];

pub fn ngtdm_features(droi: &DiscretizedRoi) -> FeatureBlock {
    let cols = build_ngtdm(droi);
    FeatureBlock::new(
        "ngtdm",
        NAMES.iter().copied().zip(columns_features(&cols)).collect(),
    )
}

pub fn columns_features(cols: &NgtdmColumns) -> [f64; 5] {
    let ng = cols.p.len();
    let n_voxels: f64 = cols.n.iter().sum();
    let populated: Vec<usize> = (0..ng).filter(|&i| cols.p[i] > 0.0).collect();
    let n_populated = populated.len() as f64;
    let level = |i: usize| (i + 1) as f64;

    let weighted_s: f64 = populated.iter().map(|&i| cols.p[i] * cols.s[i]).sum();
    let s_total: f64 = cols.s.iter().sum();

    let coarseness = if weighted_s > 0.0 {
        (1.0 / weighted_s).min(COARSENESS_CAP)
    } else {
        COARSENESS_CAP
    };

    let contrast = if populated.len() > 1 {
        let mut pair_sum = 0.0;
        for &i in &populated {
            for &j in &populated {
                pair_sum += cols.p[i] * cols.p[j] * (level(i) - level(j)).powi(2);
            }
        }
        pair_sum / (n_populated * (n_populated - 1.0)) * (s_total / n_voxels)
    } else {
        0.0
    };

    let mut busy_denom = 0.0;
    let mut complexity = 0.0;
    let mut strength_num = 0.0;
    for &i in &populated {
        for &j in &populated {
            let (li, lj) = (level(i), level(j));
            let (pi, pj) = (cols.p[i], cols.p[j]);
            busy_denom += (li * pi - lj * pj).abs();
            complexity += (li - lj).abs() * (pi * cols.s[i] + pj * cols.s[j]) / (pi + pj);
            strength_num += (pi + pj) * (li - lj).powi(2);
        }
    }
    let busyness = if busy_denom > 0.0 {
        weighted_s / busy_denom
    } else {
        0.0
    };
    complexity /= n_voxels;
    let strength = if s_total > 0.0 { strength_num / s_total } else { 0.0 };

    [coarseness, contrast, busyness, complexity, strength]
}
