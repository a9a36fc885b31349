//! Gray-level run-length matrix (16 features).
//!
//! A run is a maximal sequence of ROI voxels with equal gray level along one
//! of the 13 directions; voxels outside the ROI break runs. One matrix per
//! direction, features averaged over directions.

use ndarray::Array2;

use crate::features::{FeatureBlock, LevelGrid, DIRECTIONS_13};
use crate::roi::DiscretizedRoi;

#[derive(Debug, Clone)]
pub struct GlrlmMatrix {
    pub direction: (i32, i32, i32),
    /// Run counts, shape ng x max_run_len (column index = run length - 1).
    pub counts: Array2<f64>,
}

pub fn build_glrlm(droi: &DiscretizedRoi) -> Vec<GlrlmMatrix> {
    let grid = LevelGrid::from_droi(droi);
    let ng = droi.ng as usize;
    let (nx, ny, nz) = grid.dims();
    let max_len = nx.max(ny).max(nz);

    DIRECTIONS_13
        .iter()
        .map(|&(dx, dy, dz)| {
            let (dx, dy, dz) = (i64::from(dx), i64::from(dy), i64::from(dz));
            let mut counts = Array2::<f64>::zeros((ng, max_len));
            for (i, j, k, level) in grid.iter_voxels() {
                // A run starts where the previous cell along the direction is
                // not part of the same-level ROI segment.
                if grid.level(i - dx, j - dy, k - dz) == level {
                    continue;
                }
                let mut len = 1usize;
                let (mut ci, mut cj, mut ck) = (i + dx, j + dy, k + dz);
                while grid.level(ci, cj, ck) == level {
                    len += 1;
                    ci += dx;
                    cj += dy;
                    ck += dz;
                }
                counts[[(level - 1) as usize, len - 1]] += 1.0;
            }
            GlrlmMatrix {
                direction: (dx as i32, dy as i32, dz as i32),
                counts,
            }
        })
        .collect()
}

const NAMES: [&str; 16] = [
    "ShortRunEmphasis",
    "LongRunEmphasis",
    "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized",
    "RunLengthNonUniformity",
    "RunLengthNonUniformityNormalized",
    "RunPercentage",
    "GrayLevelVariance",
    "RunVariance",
    "RunEntropy",
    "LowGrayLevelRunEmphasis",
    "HighGrayLevelRunEmphasis",
    "ShortRunLowGrayLevelEmphasis",
    "ShortRunHighGrayLevelEmphasis",
    "LongRunLowGrayLevelEmphasis",
    "LongRunHighGrayLevelEmphasis",
];

pub fn glrlm_features(matrices: &[GlrlmMatrix], n_voxels: usize) -> FeatureBlock {
    let per_direction: Vec<[f64; 16]> = matrices
        .iter()
        .map(|m| single_matrix_features(&m.counts, n_voxels))
        .collect();
    let n = per_direction.len() as f64;
    let mean: Vec<f64> = (0..16)
        .map(|f| per_direction.iter().map(|d| d[f]).sum::<f64>() / n)
        .collect();
    FeatureBlock::new("glrlm", NAMES.iter().copied().zip(mean).collect())
}

pub(crate) fn single_matrix_features(counts: &Array2<f64>, n_voxels: usize) -> [f64; 16] {
    weighted_distribution_features(counts, n_voxels)
}

/// Shared feature kernel for level x size count matrices (GLRLM runs and
/// GLSZM zones have identical formulas over their respective matrices).
pub(crate) fn weighted_distribution_features(
    counts: &Array2<f64>,
    n_voxels: usize,
) -> [f64; 16] {
    let (ng, nl) = counts.dim();
    let total: f64 = counts.sum();
    debug_assert!(total > 0.0, "every non-empty roi produces at least one run");

    let level = |i: usize| (i + 1) as f64;
    let length = |j: usize| (j + 1) as f64;

    let row_sums: Vec<f64> = (0..ng).map(|i| counts.row(i).sum()).collect();
    let col_sums: Vec<f64> = (0..nl).map(|j| counts.column(j).sum()).collect();

    let mut sre = 0.0;
    let mut lre = 0.0;
    let mut lgl = 0.0;
    let mut hgl = 0.0;
    let mut srlgl = 0.0;
    let mut srhgl = 0.0;
    let mut lrlgl = 0.0;
    let mut lrhgl = 0.0;
    let mut mu_level = 0.0;
    let mut mu_length = 0.0;
    let mut entropy = 0.0;
    for i in 0..ng {
        for j in 0..nl {
            let c = counts[[i, j]];
            if c == 0.0 {
                continue;
            }
            let (li, lj) = (level(i), length(j));
            let (li2, lj2) = (li * li, lj * lj);
            sre += c / lj2;
            lre += c * lj2;
            lgl += c / li2;
            hgl += c * li2;
            srlgl += c / (li2 * lj2);
            srhgl += c * li2 / lj2;
            lrlgl += c * lj2 / li2;
            lrhgl += c * li2 * lj2;
            let p = c / total;
            mu_level += p * li;
            mu_length += p * lj;
            entropy -= p * p.log2();
        }
    }
    let mut var_level = 0.0;
    let mut var_length = 0.0;
    for i in 0..ng {
        for j in 0..nl {
            let p = counts[[i, j]] / total;
            if p > 0.0 {
                var_level += p * (level(i) - mu_level).powi(2);
                var_length += p * (length(j) - mu_length).powi(2);
            }
        }
    }

    let gln = row_sums.iter().map(|&s| s * s).sum::<f64>();
    let rln = col_sums.iter().map(|&s| s * s).sum::<f64>();

    [
        sre / total,
        lre / total,
        gln / total,
        gln / (total * total),
        rln / total,
        rln / (total * total),
        total / n_voxels as f64,
        var_level,
        var_length,
        entropy,
        lgl / total,
        hgl / total,
        srlgl / total,
        srhgl / total,
        lrlgl / total,
        lrhgl / total,
    ]
}
