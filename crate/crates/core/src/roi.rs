//! ROI extraction from a labeled mask and gray-level discretization.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::volume::{MaskVolume, Volume};

#[derive(Debug, Error)]
pub enum RoiError {
    #[error("no voxel carries label {0}")]
    EmptyRoi(u32),
    #[error("roi label must be >= 1")]
    ZeroLabel,
}

/// The masked voxel set with raw intensities.
#[derive(Debug, Clone)]
pub struct Roi {
    /// Voxel indices (i, j, k), in x-fastest scan order.
    pub coords: Vec<(usize, usize, usize)>,
    /// Raw intensities aligned with `coords`.
    pub intensities: Vec<f64>,
    /// Physical spacing inherited from the image, in mm.
    pub spacing: (f64, f64, f64),
    /// Tight inclusive index bounds: (min, max) per axis.
    pub bbox: ((usize, usize, usize), (usize, usize, usize)),
}

impl Roi {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// Gray-level binning specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum BinSpec {
    /// Fixed bin width in intensity units, edges anchored at the ROI minimum.
    FixedWidth { width: f64 },
    /// Fixed number of equal bins over [min, max].
    FixedCount { count: usize },
}

impl Default for BinSpec {
    fn default() -> Self {
        BinSpec::FixedWidth { width: 25.0 }
    }
}

/// A [`Roi`] with intensities mapped to integer gray levels 1..=Ng.
#[derive(Debug, Clone)]
pub struct DiscretizedRoi {
    pub roi: Roi,
    /// Gray level per voxel, aligned with `roi.coords`; each in 1..=ng.
    pub levels: Vec<u32>,
    /// Maximum assigned level (level `ng` is always populated).
    pub ng: u32,
    pub bin_spec: BinSpec,
}

/// Collect the voxels where `mask == label`, with their intensities.
pub fn extract_roi(img: &Volume, mask: &MaskVolume, label: u32) -> Result<Roi, RoiError> {
    if label == 0 {
        return Err(RoiError::ZeroLabel);
    }
    let (nx, ny, nz) = img.dims();
    let mut coords = Vec::new();
    let mut intensities = Vec::new();
    let mut min = (usize::MAX, usize::MAX, usize::MAX);
    let mut max = (0usize, 0usize, 0usize);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                if mask.get(i, j, k) == label {
                    coords.push((i, j, k));
                    intensities.push(img.get(i, j, k));
                    min = (min.0.min(i), min.1.min(j), min.2.min(k));
                    max = (max.0.max(i), max.1.max(j), max.2.max(k));
                }
            }
        }
    }
    if coords.is_empty() {
        return Err(RoiError::EmptyRoi(label));
    }
    Ok(Roi {
        coords,
        intensities,
        spacing: img.spacing(),
        bbox: (min, max),
    })
}

/// Map ROI intensities to integer gray levels per the bin specification.
///
/// Fixed-width: level(x) = floor((x - min) / w) + 1, with the maximum
/// intensity clamped into the top level. Fixed-count: [min, max] is split
/// into `count` equal bins and the maximum clamped into bin `count`.
/// A constant-intensity ROI always yields a single level.
pub fn discretize(roi: Roi, spec: BinSpec) -> DiscretizedRoi {
    assert!(!roi.is_empty(), "discretize requires a non-empty roi");
    let min = roi.intensities.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = roi
        .intensities
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);

    let levels: Vec<u32> = match spec {
        BinSpec::FixedWidth { width } => {
            assert!(width > 0.0, "bin width must be positive");
            let top = ((max - min) / width).floor() as u32 + 1;
            roi.intensities
                .iter()
                .map(|&x| (((x - min) / width).floor() as u32 + 1).min(top))
                .collect()
        }
        BinSpec::FixedCount { count } => {
            assert!(count >= 2, "bin count must be at least 2");
            if max == min {
                vec![1; roi.intensities.len()]
            } else {
                let w = (max - min) / count as f64;
                roi.intensities
                    .iter()
                    .map(|&x| (((x - min) / w).floor() as u32 + 1).min(count as u32))
                    .collect()
            }
        }
    };
    let ng = *levels.iter().max().expect("non-empty roi");
    DiscretizedRoi {
        roi,
        levels,
        ng,
        bin_spec: spec,
    }
}
