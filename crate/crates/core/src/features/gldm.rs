//! Gray-level dependence matrix (14 features).
//!
//! Each voxel's dependence is 1 plus the number of its 26-neighbors inside
//! the ROI whose level differs by at most `alpha`. The single matrix counts
//! voxels by (level, dependence).

use ndarray::Array2;

use crate::features::{offsets_26, FeatureBlock, LevelGrid};
use crate::roi::DiscretizedRoi;

#[derive(Debug, Clone)]
pub struct GldmMatrix {
    /// Voxel counts, shape ng x max_dependence (column index = d - 1).
    pub counts: Array2<f64>,
}

pub fn build_gldm(droi: &DiscretizedRoi, alpha: u32) -> GldmMatrix {
    let grid = LevelGrid::from_droi(droi);
    let ng = droi.ng as usize;
    let offsets = offsets_26();

    let mut entries: Vec<(u32, usize)> = Vec::with_capacity(grid.n_voxels());
    let mut max_dep = 1usize;
    for (i, j, k, level) in grid.iter_voxels() {
        let mut dep = 1usize;
        for &(dx, dy, dz) in &offsets {
            let other = grid.level(i + i64::from(dx), j + i64::from(dy), k + i64::from(dz));
            if other != 0 && level.abs_diff(other) <= alpha {
                dep += 1;
            }
        }
        max_dep = max_dep.max(dep);
        entries.push((level, dep));
    }

    let mut counts = Array2::<f64>::zeros((ng, max_dep));
    for (level, dep) in entries {
        counts[[(level - 1) as usize, dep - 1]] += 1.0;
    }
    GldmMatrix { counts }
}

const NAMES: [&str; 14] = [
    "SmallDependenceEmphasis",
    "LargeDependenceEmphasis",
    "GrayLevelNonUniformity",
    "DependenceNonUniformity",
    "DependenceNonUniformityNormalized",
    "GrayLevelVariance",
    "DependenceVariance",
    "DependenceEntropy",
    "LowGrayLevelEmphasis",
    "HighGrayLevelEmphasis",
    "SmallDependenceLowGrayLevelEmphasis",
    "SmallDependenceHighGrayLevelEmphasis",
    "LargeDependenceLowGrayLevelEmphasis",
    "LargeDependenceHighGrayLevelEmphasis",
];

pub fn gldm_features(droi: &DiscretizedRoi, alpha: u32) -> FeatureBlock {
    let matrix = build_gldm(droi, alpha);
    FeatureBlock::new(
        "gldm",
        NAMES
            .iter()
            .copied()
            .zip(matrix_features(&matrix.counts))
            .collect(),
    )
}

pub fn matrix_features(counts: &Array2<f64>) -> [f64; 14] {
    let (ng, nd) = counts.dim();
    let total: f64 = counts.sum();
    debug_assert!(total > 0.0);

    let level = |i: usize| (i + 1) as f64;
    let dep = |j: usize| (j + 1) as f64;

    let row_sums: Vec<f64> = (0..ng).map(|i| counts.row(i).sum()).collect();
    let col_sums: Vec<f64> = (0..nd).map(|j| counts.column(j).sum()).collect();

    let mut sde = 0.0;
    let mut lde = 0.0;
    let mut lgl = 0.0;
    let mut hgl = 0.0;
    let mut sdlgl = 0.0;
    let mut sdhgl = 0.0;
    let mut ldlgl = 0.0;
    let mut ldhgl = 0.0;
    let mut mu_level = 0.0;
    let mut mu_dep = 0.0;
    let mut entropy = 0.0;
    for i in 0..ng {
        for j in 0..nd {
            let c = counts[[i, j]];
            if c == 0.0 {
                continue;
            }
            let (li, dj) = (level(i), dep(j));
            let (li2, dj2) = (li * li, dj * dj);
            sde += c / dj2;
            lde += c * dj2;
            lgl += c / li2;
            hgl += c * li2;
            sdlgl += c / (li2 * dj2);
            sdhgl += c * li2 / dj2;
            ldlgl += c * dj2 / li2;
            ldhgl += c * li2 * dj2;
            let p = c / total;
            mu_level += p * li;
            mu_dep += p * dj;
            entropy -= p * p.log2();
        }
    }
    let mut var_level = 0.0;
    let mut var_dep = 0.0;
    for i in 0..ng {
        for j in 0..nd {
            let p = counts[[i, j]] / total;
            if p > 0.0 {
                var_level += p * (level(i) - mu_level).powi(2);
                var_dep += p * (dep(j) - mu_dep).powi(2);
            }
        }
    }

    let gln = row_sums.iter().map(|&s| s * s).sum::<f64>();
    let dn = col_sums.iter().map(|&s| s * s).sum::<f64>();

    [
        sde / total,
        lde / total,
        gln / total,
        dn / total,
        dn / (total * total),
        var_level,
        var_dep,
        entropy,
        lgl / total,
        hgl / total,
        sdlgl / total,
        sdhgl / total,
        ldlgl / total,
        ldhgl / total,
    ]
}
