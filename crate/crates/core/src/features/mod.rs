//! Radiomic feature extraction: first-order statistics, shape descriptors
//! and gray-level texture features computed from a discretized ROI.
//!
//! [`extract_all`] concatenates the eight feature classes into the 120-value
//! vector emitted per case:
//! first order (19), shape 3D (16), shape 2D (10), GLCM (24), GLRLM (16),
//! GLSZM (16), GLDM (14), NGTDM (5).

pub mod firstorder;
pub mod gldm;
pub mod glcm;
pub mod glrlm;
pub mod glszm;
pub mod ngtdm;
pub mod shape;

use thiserror::Error;

use crate::roi::{discretize, extract_roi, BinSpec, DiscretizedRoi, RoiError};
use crate::volume::{validate_geometry, MaskVolume, Volume, VolumeError};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error(transparent)]
    Geometry(#[from] VolumeError),
    #[error(transparent)]
    Roi(#[from] RoiError),
}

/// One feature class: ordered names with aligned values.
#[derive(Debug, Clone)]
pub struct FeatureBlock {
    pub class_name: &'static str,
    pub names: Vec<&'static str>,
    pub values: Vec<f64>,
}

impl FeatureBlock {
    pub fn new(class_name: &'static str, entries: Vec<(&'static str, f64)>) -> Self {
        let (names, values) = entries.into_iter().unzip();
        Self {
            class_name,
            names,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|&n| n == name)
            .map(|i| self.values[i])
    }
}

/// The full named per-case feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }
}

/// The 13 unique directions of the 26-neighborhood (opposite pairs merged).
pub const DIRECTIONS_13: [(i32, i32, i32); 13] = [
    (1, 0, 0),
    (-1, 1, 0),
    (0, 1, 0),
    (1, 1, 0),
    (-1, -1, 1),
    (0, -1, 1),
    (1, -1, 1),
    (-1, 0, 1),
    (0, 0, 1),
    (1, 0, 1),
    (-1, 1, 1),
    (0, 1, 1),
    (1, 1, 1),
];

/// All 26 neighbor offsets at Chebyshev distance 1.
pub fn offsets_26() -> Vec<(i32, i32, i32)> {
    let mut out = Vec::with_capacity(26);
    for dz in -1..=1 {
        for dy in -1..=1 {
            for dx in -1..=1 {
                if (dx, dy, dz) != (0, 0, 0) {
                    out.push((dx, dy, dz));
                }
            }
        }
    }
    out
}

/// Dense gray-level grid over the ROI bounding box; 0 marks non-ROI cells.
#[derive(Debug, Clone)]
pub struct LevelGrid {
    dims: (usize, usize, usize),
    cells: Vec<u32>,
}

impl LevelGrid {
    pub fn from_droi(droi: &DiscretizedRoi) -> Self {
        let (lo, hi) = droi.roi.bbox;
        let dims = (hi.0 - lo.0 + 1, hi.1 - lo.1 + 1, hi.2 - lo.2 + 1);
        let mut cells = vec![0u32; dims.0 * dims.1 * dims.2];
        for (coord, &level) in droi.roi.coords.iter().zip(&droi.levels) {
            let (i, j, k) = (coord.0 - lo.0, coord.1 - lo.1, coord.2 - lo.2);
            cells[i + dims.0 * (j + dims.1 * k)] = level;
        }
        Self { dims, cells }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    /// Gray level at (i, j, k); 0 if outside the grid or not in the ROI.
    pub fn level(&self, i: i64, j: i64, k: i64) -> u32 {
        if i < 0
            || j < 0
            || k < 0
            || i >= self.dims.0 as i64
            || j >= self.dims.1 as i64
            || k >= self.dims.2 as i64
        {
            return 0;
        }
        self.cells[i as usize + self.dims.0 * (j as usize + self.dims.1 * k as usize)]
    }

    pub fn contains(&self, i: i64, j: i64, k: i64) -> bool {
        self.level(i, j, k) != 0
    }

    /// Iterate ROI voxels as (i, j, k, level) in x-fastest order.
    pub fn iter_voxels(&self) -> impl Iterator<Item = (i64, i64, i64, u32)> + '_ {
        let (nx, ny, _) = self.dims;
        self.cells.iter().enumerate().filter_map(move |(idx, &l)| {
            if l == 0 {
                None
            } else {
                let i = idx % nx;
                let j = (idx / nx) % ny;
                let k = idx / (nx * ny);
                Some((i as i64, j as i64, k as i64, l))
            }
        })
    }

    pub fn n_voxels(&self) -> usize {
        self.cells.iter().filter(|&&l| l != 0).count()
    }
}

/// Compute all eight feature blocks for one case.
pub fn extract_all(
    img: &Volume,
    mask: &MaskVolume,
    label: u32,
    spec: BinSpec,
) -> Result<FeatureVector, FeatureError> {
    validate_geometry(img, mask)?;
    let roi = extract_roi(img, mask, label)?;
    let droi = discretize(roi, spec);
    Ok(feature_vector_from_droi(&droi))
}

/// Feature vector from an already-discretized ROI (Table-1 class order).
pub fn feature_vector_from_droi(droi: &DiscretizedRoi) -> FeatureVector {
    let grid = LevelGrid::from_droi(droi);
    let geom = shape::ShapeGeometry::from_roi(&droi.roi);
    let blocks = [
        firstorder::first_order_features(&droi.roi, droi),
        shape::shape3d_features(&geom),
        shape::shape2d_features(&geom),
        glcm::glcm_features(&glcm::build_glcm(droi, 1)),
        glrlm::glrlm_features(&glrlm::build_glrlm(droi), grid.n_voxels()),
        glszm::glszm_features(&glszm::build_glszm(droi), grid.n_voxels()),
        gldm::gldm_features(droi, 0),
        ngtdm::ngtdm_features(droi),
    ];
    let mut names = Vec::with_capacity(120);
    let mut values = Vec::with_capacity(120);
    for block in blocks {
        for (name, value) in block.names.iter().zip(&block.values) {
            names.push(format!("{}_{}", block.class_name, name));
            values.push(*value);
        }
    }
    FeatureVector { names, values }
}
