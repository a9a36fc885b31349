//! Gray-level size-zone matrix (16 features).
//!
//! A zone is a 26-connected component of equal gray level inside the ROI.
//! Unlike GLRLM there is a single matrix; the features are the zone
//! analogues of the run-length set and reuse its computation kernel.

use ndarray::Array2;

use crate::features::{glrlm, FeatureBlock, LevelGrid};
use crate::roi::DiscretizedRoi;

#[derive(Debug, Clone)]
pub struct GlszmMatrix {
    /// Zone counts, shape ng x max_zone_size (column index = size - 1).
    pub counts: Array2<f64>,
}

pub fn build_glszm(droi: &DiscretizedRoi) -> GlszmMatrix {
    let grid = LevelGrid::from_droi(droi);
    let ng = droi.ng as usize;
    let (nx, ny, nz) = grid.dims();

    let mut visited = vec![false; nx * ny * nz];
    let flat = |i: i64, j: i64, k: i64| i as usize + nx * (j as usize + ny * k as usize);

    let mut zones: Vec<(u32, usize)> = Vec::new();
    for (i, j, k, level) in grid.iter_voxels() {
        if visited[flat(i, j, k)] {
            continue;
        }
        // Flood fill the 26-connected same-level zone.
        let mut size = 0usize;
        let mut stack = vec![(i, j, k)];
        visited[flat(i, j, k)] = true;
        while let Some((ci, cj, ck)) = stack.pop() {
            size += 1;
            for dz in -1..=1 {
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        if (dx, dy, dz) == (0, 0, 0) {
                            continue;
                        }
                        let (ni, nj, nk) = (ci + dx, cj + dy, ck + dz);
                        if grid.level(ni, nj, nk) == level && !visited[flat(ni, nj, nk)] {
                            visited[flat(ni, nj, nk)] = true;
                            stack.push((ni, nj, nk));
                        }
                    }
                }
            }
        }
        zones.push((level, size));
    }

    let max_size = zones.iter().map(|&(_, s)| s).max().unwrap_or(1);
    let mut counts = Array2::<f64>::zeros((ng, max_size));
    for (level, size) in zones {
        counts[[(level - 1) as usize, size - 1]] += 1.0;
    }
    GlszmMatrix { counts }
}

const NAMES: [&str; 16] = [
    "SmallAreaEmphasis",
    "LargeAreaEmphasis",
    "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized",
    "SizeZoneNonUniformity",
    "SizeZoneNonUniformityNormalized",
    "ZonePercentage",
    "GrayLevelVariance",
    "ZoneVariance",
    "ZoneEntropy",
    "LowGrayLevelZoneEmphasis",
    "HighGrayLevelZoneEmphasis",
    "SmallAreaLowGrayLevelEmphasis",
    "SmallAreaHighGrayLevelEmphasis",
    "LargeAreaLowGrayLevelEmphasis",
    "LargeAreaHighGrayLevelEmphasis",
];

pub fn glszm_features(matrix: &GlszmMatrix, n_voxels: usize) -> FeatureBlock {
    let values = glrlm::weighted_distribution_features(&matrix.counts, n_voxels);
    FeatureBlock::new("glszm", NAMES.iter().copied().zip(values).collect())
}
