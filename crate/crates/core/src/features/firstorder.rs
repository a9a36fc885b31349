//! First-order intensity statistics (19 features).
//!
//! All moments use the population convention (divide by N); Kurtosis is
//! non-excess (a Gaussian approaches 3). Entropy and Uniformity are computed
//! on the discretized-level histogram; everything else uses raw intensities.

use crate::features::FeatureBlock;
use crate::roi::{DiscretizedRoi, Roi};

/// Percentile with linear interpolation between order statistics
/// (rank = q/100 * (N-1) on the sorted values).
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let rank = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn first_order_features(roi: &Roi, droi: &DiscretizedRoi) -> FeatureBlock {
    let x = &roi.intensities;
    let n = x.len() as f64;
    let voxel_volume = roi.spacing.0 * roi.spacing.1 * roi.spacing.2;

    let mut sorted = x.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let minimum = sorted[0];
    let maximum = sorted[sorted.len() - 1];
    let p10 = percentile(&sorted, 10.0);
    let p25 = percentile(&sorted, 25.0);
    let median = percentile(&sorted, 50.0);
    let p75 = percentile(&sorted, 75.0);
    let p90 = percentile(&sorted, 90.0);

    let mean = x.iter().sum::<f64>() / n;
    let energy = x.iter().map(|v| v * v).sum::<f64>();
    let variance = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std_dev = variance.sqrt();
    let mad = x.iter().map(|v| (v - mean).abs()).sum::<f64>() / n;

    // Robust MAD: deviation of the [P10, P90] subset from its own mean.
    let robust: Vec<f64> = x.iter().cloned().filter(|&v| v >= p10 && v <= p90).collect();
    let rmad = if robust.is_empty() {
        0.0
    } else {
        let rmean = robust.iter().sum::<f64>() / robust.len() as f64;
        robust.iter().map(|v| (v - rmean).abs()).sum::<f64>() / robust.len() as f64
    };

    let (skewness, kurtosis) = if std_dev == 0.0 {
        (0.0, 0.0)
    } else {
        let m3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
        let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
        (m3 / variance.powf(1.5), m4 / (variance * variance))
    };

    // Discretized-level histogram for Entropy / Uniformity.
    let mut counts = vec![0usize; droi.ng as usize];
    for &level in &droi.levels {
        counts[(level - 1) as usize] += 1;
    }
    let mut entropy = 0.0;
    let mut uniformity = 0.0;
    for &c in &counts {
        if c > 0 {
            let p = c as f64 / n;
            entropy -= p * p.log2();
            uniformity += p * p;
        }
    }

    FeatureBlock::new(
        "firstorder",
        vec![
            ("Energy", energy),
            ("TotalEnergy", voxel_volume * energy),
            ("Entropy", entropy),
            ("Minimum", minimum),
            ("Percentile10", p10),
            ("Percentile90", p90),
            ("Maximum", maximum),
            ("Mean", mean),
            ("Median", median),
            ("InterquartileRange", p75 - p25),
            ("Range", maximum - minimum),
            ("MeanAbsoluteDeviation", mad),
            ("RobustMeanAbsoluteDeviation", rmad),
            ("RootMeanSquared", (energy / n).sqrt()),
            ("StandardDeviation", std_dev),
            ("Skewness", skewness),
            ("Kurtosis", kurtosis),
            ("Variance", variance),
            ("Uniformity", uniformity),
        ],
    )
}
