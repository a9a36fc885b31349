//! Gray-level co-occurrence matrix (24 features).
//!
//! One matrix per unique 3D direction (13), counting only voxel pairs fully
//! inside the ROI, symmetrized (M + M^T) and normalized to sum 1. Features
//! are computed per direction and arithmetic-averaged; directions with no
//! pairs are skipped. Entropies use log base 2 with the 0*log(0) = 0 guard.

use nalgebra::DMatrix;
use ndarray::Array2;

use crate::features::{FeatureBlock, LevelGrid, DIRECTIONS_13};
use crate::roi::DiscretizedRoi;

#[derive(Debug, Clone)]
pub struct GlcmMatrix {
    pub direction: (i32, i32, i32),
    /// Symmetrized pair counts, shape ng x ng (row/col index = level - 1).
    pub counts: Array2<f64>,
    /// Counts normalized to sum 1; all zeros when the direction has no pairs.
    pub probs: Array2<f64>,
}

pub fn build_glcm(droi: &DiscretizedRoi, distance: i32) -> Vec<GlcmMatrix> {
    assert!(distance >= 1, "glcm distance must be >= 1");
    let grid = LevelGrid::from_droi(droi);
    let ng = droi.ng as usize;
    DIRECTIONS_13
        .iter()
        .map(|&(dx, dy, dz)| {
            let step = (dx * distance, dy * distance, dz * distance);
            let mut counts = Array2::<f64>::zeros((ng, ng));
            for (i, j, k, level) in grid.iter_voxels() {
                let other = grid.level(
                    i + i64::from(step.0),
                    j + i64::from(step.1),
                    k + i64::from(step.2),
                );
                if other != 0 {
                    counts[[(level - 1) as usize, (other - 1) as usize]] += 1.0;
                }
            }
            // Symmetrize: count each pair in both orders.
            let counts = &counts + &counts.t();
            let total: f64 = counts.sum();
            let probs = if total > 0.0 {
                &counts / total
            } else {
                counts.clone()
            };
            GlcmMatrix {
                direction: (dx, dy, dz),
                counts,
                probs,
            }
        })
        .collect()
}

const NAMES: [&str; 24] = [
    "Autocorrelation",
    "JointAverage",
    "ClusterProminence",
    "ClusterShade",
    "ClusterTendency",
    "Contrast",
    "Correlation",
    "DifferenceAverage",
    "DifferenceEntropy",
    "DifferenceVariance",
    "JointEnergy",
    "JointEntropy",
    "Imc1",
    "Imc2",
    "Idm",
    "Idmn",
    "Id",
    "Idn",
    "InverseVariance",
    "MaximumProbability",
    "SumAverage",
    "SumEntropy",
    "SumSquares",
    "MCC",
];

pub fn glcm_features(matrices: &[GlcmMatrix]) -> FeatureBlock {
    let populated: Vec<&GlcmMatrix> = matrices
        .iter()
        .filter(|m| m.counts.sum() > 0.0)
        .collect();

    // A single-voxel ROI has no co-occurring pairs in any direction; it is
    // indistinguishable from a constant 1x1 region, so use that limit.
    let fallback = GlcmMatrix {
        direction: (0, 0, 0),
        counts: Array2::from_elem((1, 1), 1.0),
        probs: Array2::from_elem((1, 1), 1.0),
    };
    let per_direction: Vec<[f64; 24]> = if populated.is_empty() {
        vec![single_matrix_features(&fallback.probs)]
    } else {
        populated
            .iter()
            .map(|m| single_matrix_features(&m.probs))
            .collect()
    };

    let n = per_direction.len() as f64;
    let mean: Vec<f64> = (0..24)
        .map(|f| per_direction.iter().map(|d| d[f]).sum::<f64>() / n)
        .collect();
    FeatureBlock::new("glcm", NAMES.iter().copied().zip(mean).collect())
}

fn xlog2(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

fn single_matrix_features(p: &Array2<f64>) -> [f64; 24] {
    let ng = p.nrows();
    let ng_f = ng as f64;
    let level = |idx: usize| (idx + 1) as f64;

    let px: Vec<f64> = (0..ng).map(|i| p.row(i).sum()).collect();
    let py: Vec<f64> = (0..ng).map(|j| p.column(j).sum()).collect();
    let mu_x: f64 = px.iter().enumerate().map(|(i, &v)| level(i) * v).sum();
    let mu_y: f64 = py.iter().enumerate().map(|(j, &v)| level(j) * v).sum();
    let sigma_x = px
        .iter()
        .enumerate()
        .map(|(i, &v)| (level(i) - mu_x).powi(2) * v)
        .sum::<f64>()
        .sqrt();
    let sigma_y = py
        .iter()
        .enumerate()
        .map(|(j, &v)| (level(j) - mu_y).powi(2) * v)
        .sum::<f64>()
        .sqrt();

    // Sum and difference distributions: p_{x+y}(k), k = 2..=2*ng (index k-2),
    // and p_{x-y}(k), k = 0..=ng-1.
    let mut p_sum = vec![0.0f64; 2 * ng - 1];
    let mut p_diff = vec![0.0f64; ng];
    for i in 0..ng {
        for j in 0..ng {
            let v = p[[i, j]];
            p_sum[i + j] += v;
            p_diff[i.abs_diff(j)] += v;
        }
    }

    let mut autocorrelation = 0.0;
    let mut cluster_prominence = 0.0;
    let mut cluster_shade = 0.0;
    let mut cluster_tendency = 0.0;
    let mut contrast = 0.0;
    let mut joint_energy = 0.0;
    let mut joint_entropy = 0.0;
    let mut hxy1 = 0.0;
    let mut idm = 0.0;
    let mut idmn = 0.0;
    let mut id = 0.0;
    let mut idn = 0.0;
    let mut max_prob = 0.0f64;
    let mut sum_squares = 0.0;
    for i in 0..ng {
        for j in 0..ng {
            let v = p[[i, j]];
            let (li, lj) = (level(i), level(j));
            autocorrelation += li * lj * v;
            let c = li + lj - mu_x - mu_y;
            cluster_prominence += c.powi(4) * v;
            cluster_shade += c.powi(3) * v;
            cluster_tendency += c.powi(2) * v;
            let d = li - lj;
            contrast += d * d * v;
            joint_energy += v * v;
            joint_entropy -= xlog2(v);
            if v > 0.0 {
                hxy1 -= v * (px[i] * py[j]).log2();
            }
            idm += v / (1.0 + d * d);
            idmn += v / (1.0 + (d / ng_f).powi(2));
            id += v / (1.0 + d.abs());
            idn += v / (1.0 + d.abs() / ng_f);
            max_prob = max_prob.max(v);
            sum_squares += (li - mu_x).powi(2) * v;
        }
    }

    let correlation = if sigma_x * sigma_y > 0.0 {
        (autocorrelation - mu_x * mu_y) / (sigma_x * sigma_y)
    } else {
        1.0
    };

    let difference_average: f64 = p_diff
        .iter()
        .enumerate()
        .map(|(k, &v)| k as f64 * v)
        .sum();
    let difference_entropy: f64 = -p_diff.iter().map(|&v| xlog2(v)).sum::<f64>();
    let difference_variance: f64 = p_diff
        .iter()
        .enumerate()
        .map(|(k, &v)| (k as f64 - difference_average).powi(2) * v)
        .sum();
    let inverse_variance: f64 = p_diff
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &v)| v / (k * k) as f64)
        .sum();

    // Sum distribution weights use the actual level sum k = i + j (levels
    // start at 1, so index s holds k = s + 2).
    let sum_average: f64 = p_sum
        .iter()
        .enumerate()
        .map(|(s, &v)| (s + 2) as f64 * v)
        .sum();
    let sum_entropy: f64 = -p_sum.iter().map(|&v| xlog2(v)).sum::<f64>();

    let hx: f64 = -px.iter().map(|&v| xlog2(v)).sum::<f64>();
    let hy: f64 = -py.iter().map(|&v| xlog2(v)).sum::<f64>();
    let hxy2: f64 = -(0..ng)
        .flat_map(|i| (0..ng).map(move |j| (i, j)))
        .map(|(i, j)| xlog2(px[i] * py[j]))
        .sum::<f64>();

    let imc1 = if hx.max(hy) > 0.0 {
        (joint_entropy - hxy1) / hx.max(hy)
    } else {
        0.0
    };
    let imc2 = {
        let arg = 1.0 - (-2.0 * (hxy2 - joint_entropy)).exp();
        if arg > 0.0 {
            arg.sqrt()
        } else {
            0.0
        }
    };

    let mcc = max_correlation_coefficient(p, &px);

    [
        autocorrelation,
        mu_x,
        cluster_prominence,
        cluster_shade,
        cluster_tendency,
        contrast,
        correlation,
        difference_average,
        difference_entropy,
        difference_variance,
        joint_energy,
        joint_entropy,
        imc1,
        imc2,
        idm,
        idmn,
        id,
        idn,
        inverse_variance,
        max_prob,
        sum_average,
        sum_entropy,
        sum_squares,
        mcc,
    ]
}

/// Square root of the second-largest eigenvalue of the Markov-style matrix
/// Q(i,j) = sum_k p(i,k) p(j,k) / (px(i) px(k)).
///
/// Q is similar to the symmetric PSD matrix M = S S^T with
/// S(i,k) = p(i,k) / sqrt(px(i) px(k)), so the eigenvalues are computed from
/// M over the populated levels. Fewer than two populated levels yield the
/// degenerate value 1.
fn max_correlation_coefficient(p: &Array2<f64>, px: &[f64]) -> f64 {
    let populated: Vec<usize> = (0..p.nrows()).filter(|&i| px[i] > 0.0).collect();
    let m = populated.len();
    if m < 2 {
        return 1.0;
    }
    let mut s = DMatrix::<f64>::zeros(m, m);
    for (r, &i) in populated.iter().enumerate() {
        for (c, &k) in populated.iter().enumerate() {
            s[(r, c)] = p[[i, k]] / (px[i] * px[k]).sqrt();
        }
    }
    let sym = &s * s.transpose();
    let mut eig: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
    eig[1].max(0.0).sqrt()
}
