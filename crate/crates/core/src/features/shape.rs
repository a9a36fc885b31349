//! Intensity-independent shape descriptors of the mask: 16 features on the
//! 3D voxel set and 10 on the largest axial slice.
//!
//! Surface area and perimeter use the exposed voxel-face convention (no
//! meshing): a face is counted when the 6-neighbor (4-neighbor in 2D) across
//! it is not part of the ROI. Axis lengths come from the eigenvalues of the
//! physical-coordinate covariance, population convention, as 4*sqrt(lambda).

use nalgebra::{Matrix2, Matrix3};

use crate::features::FeatureBlock;
use crate::roi::Roi;

/// Voxel-set geometry snapshot used by both shape feature groups.
#[derive(Debug, Clone)]
pub struct ShapeGeometry {
    dims: (usize, usize, usize),
    occupied: Vec<bool>,
    /// ROI voxel indices relative to the bounding-box origin.
    coords: Vec<(usize, usize, usize)>,
    spacing: (f64, f64, f64),
}

impl ShapeGeometry {
    pub fn from_roi(roi: &Roi) -> Self {
        let (lo, hi) = roi.bbox;
        let dims = (hi.0 - lo.0 + 1, hi.1 - lo.1 + 1, hi.2 - lo.2 + 1);
        let mut occupied = vec![false; dims.0 * dims.1 * dims.2];
        let mut coords = Vec::with_capacity(roi.coords.len());
        for &(i, j, k) in &roi.coords {
            let c = (i - lo.0, j - lo.1, k - lo.2);
            occupied[c.0 + dims.0 * (c.1 + dims.1 * c.2)] = true;
            coords.push(c);
        }
        Self {
            dims,
            occupied,
            coords,
            spacing: roi.spacing,
        }
    }

    fn is_set(&self, i: i64, j: i64, k: i64) -> bool {
        if i < 0
            || j < 0
            || k < 0
            || i >= self.dims.0 as i64
            || j >= self.dims.1 as i64
            || k >= self.dims.2 as i64
        {
            return false;
        }
        self.occupied[i as usize + self.dims.0 * (j as usize + self.dims.1 * k as usize)]
    }

    /// Voxels with at least one of their 6 faces exposed.
    fn boundary_voxels(&self) -> Vec<(usize, usize, usize)> {
        self.coords
            .iter()
            .copied()
            .filter(|&(i, j, k)| {
                let (i, j, k) = (i as i64, j as i64, k as i64);
                !(self.is_set(i - 1, j, k)
                    && self.is_set(i + 1, j, k)
                    && self.is_set(i, j - 1, k)
                    && self.is_set(i, j + 1, k)
                    && self.is_set(i, j, k - 1)
                    && self.is_set(i, j, k + 1))
            })
            .collect()
    }

    fn physical(&self, c: (usize, usize, usize)) -> [f64; 3] {
        [
            c.0 as f64 * self.spacing.0,
            c.1 as f64 * self.spacing.1,
            c.2 as f64 * self.spacing.2,
        ]
    }
}

fn max_pairwise_sq(points: &[[f64; 3]]) -> f64 {
    let mut best = 0.0f64;
    for (a_idx, a) in points.iter().enumerate() {
        for b in &points[a_idx + 1..] {
            let d = (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2);
            best = best.max(d);
        }
    }
    best
}

/// Eigenvalues of the population covariance of `points`, sorted descending
/// and clamped to be non-negative.
fn covariance_eigenvalues_3d(points: &[[f64; 3]]) -> [f64; 3] {
    let n = points.len() as f64;
    let mut mean = [0.0f64; 3];
    for p in points {
        for a in 0..3 {
            mean[a] += p[a];
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut cov = [[0.0f64; 3]; 3];
    for p in points {
        for a in 0..3 {
            for b in 0..3 {
                cov[a][b] += (p[a] - mean[a]) * (p[b] - mean[b]);
            }
        }
    }
    for row in &mut cov {
        for v in row.iter_mut() {
            *v /= n;
        }
    }
    let m = Matrix3::new(
        cov[0][0], cov[0][1], cov[0][2], cov[1][0], cov[1][1], cov[1][2], cov[2][0], cov[2][1],
        cov[2][2],
    );
    let mut eig: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
    [eig[0].max(0.0), eig[1].max(0.0), eig[2].max(0.0)]
}

fn covariance_eigenvalues_2d(points: &[[f64; 2]]) -> [f64; 2] {
    let n = points.len() as f64;
    let mut mean = [0.0f64; 2];
    for p in points {
        mean[0] += p[0];
        mean[1] += p[1];
    }
    mean[0] /= n;
    mean[1] /= n;
    let mut cov = [[0.0f64; 2]; 2];
    for p in points {
        for a in 0..2 {
            for b in 0..2 {
                cov[a][b] += (p[a] - mean[a]) * (p[b] - mean[b]);
            }
        }
    }
    for row in &mut cov {
        for v in row.iter_mut() {
            *v /= n;
        }
    }
    let m = Matrix2::new(cov[0][0], cov[0][1], cov[1][0], cov[1][1]);
    let mut eig: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
    [eig[0].max(0.0), eig[1].max(0.0)]
}

pub fn shape3d_features(geom: &ShapeGeometry) -> FeatureBlock {
    let (sx, sy, sz) = geom.spacing;
    let n = geom.coords.len() as f64;
    let volume = n * sx * sy * sz;

    let mut surface_area = 0.0;
    for &(i, j, k) in &geom.coords {
        let (i, j, k) = (i as i64, j as i64, k as i64);
        for (di, dj, dk, face) in [
            (-1, 0, 0, sy * sz),
            (1, 0, 0, sy * sz),
            (0, -1, 0, sx * sz),
            (0, 1, 0, sx * sz),
            (0, 0, -1, sx * sy),
            (0, 0, 1, sx * sy),
        ] {
            if !geom.is_set(i + di, j + dj, k + dk) {
                surface_area += face;
            }
        }
    }

    let sphericity = std::f64::consts::PI.powf(1.0 / 3.0) * (6.0 * volume).powf(2.0 / 3.0)
        / surface_area;
    let compactness1 = volume / (std::f64::consts::PI.sqrt() * surface_area.powf(1.5));
    let compactness2 =
        36.0 * std::f64::consts::PI * volume * volume / surface_area.powi(3);

    let boundary = geom.boundary_voxels();
    let boundary_phys: Vec<[f64; 3]> = boundary.iter().map(|&c| geom.physical(c)).collect();
    let max_diameter_3d = max_pairwise_sq(&boundary_phys).sqrt();

    // In-plane diameters: the maximum over pairs of boundary voxels sharing
    // the fixed axis index of that plane family.
    let mut planar_sq = [0.0f64; 3]; // [same k, same i, same j]
    for (a_idx, &(ai, aj, ak)) in boundary.iter().enumerate() {
        let pa = boundary_phys[a_idx];
        for (b_idx, &(bi, bj, bk)) in boundary.iter().enumerate().skip(a_idx + 1) {
            let pb = boundary_phys[b_idx];
            let d = (pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2) + (pa[2] - pb[2]).powi(2);
            if ak == bk {
                planar_sq[0] = planar_sq[0].max(d);
            }
            if ai == bi {
                planar_sq[1] = planar_sq[1].max(d);
            }
            if aj == bj {
                planar_sq[2] = planar_sq[2].max(d);
            }
        }
    }

    let phys: Vec<[f64; 3]> = geom.coords.iter().map(|&c| geom.physical(c)).collect();
    let [l1, l2, l3] = covariance_eigenvalues_3d(&phys);
    let elongation = if l1 > 0.0 { (l2 / l1).sqrt() } else { 0.0 };
    let flatness = if l1 > 0.0 { (l3 / l1).sqrt() } else { 0.0 };

    FeatureBlock::new(
        "shape3d",
        vec![
            ("VoxelVolume", volume),
            ("SurfaceArea", surface_area),
            ("SurfaceVolumeRatio", surface_area / volume),
            ("Sphericity", sphericity),
            ("Compactness1", compactness1),
            ("Compactness2", compactness2),
            ("SphericalDisproportion", 1.0 / sphericity),
            ("Maximum3DDiameter", max_diameter_3d),
            ("Maximum2DDiameterSlice", planar_sq[0].sqrt()),
            ("Maximum2DDiameterColumn", planar_sq[1].sqrt()),
            ("Maximum2DDiameterRow", planar_sq[2].sqrt()),
            ("MajorAxisLength", 4.0 * l1.sqrt()),
            ("MinorAxisLength", 4.0 * l2.sqrt()),
            ("LeastAxisLength", 4.0 * l3.sqrt()),
            ("Elongation", elongation),
            ("Flatness", flatness),
        ],
    )
}

pub fn shape2d_features(geom: &ShapeGeometry) -> FeatureBlock {
    let (sx, sy, _) = geom.spacing;

    // Largest axial slice by pixel count; ties go to the lowest k.
    let mut per_slice = vec![0usize; geom.dims.2];
    for &(_, _, k) in &geom.coords {
        per_slice[k] += 1;
    }
    let best_k = per_slice
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(k, _)| k)
        .unwrap();
    let pixels: Vec<(usize, usize)> = geom
        .coords
        .iter()
        .filter(|&&(_, _, k)| k == best_k)
        .map(|&(i, j, _)| (i, j))
        .collect();

    let n = pixels.len() as f64;
    let area = n * sx * sy;

    let kk = best_k as i64;
    let mut perimeter = 0.0;
    for &(i, j) in &pixels {
        let (i, j) = (i as i64, j as i64);
        if !geom.is_set(i - 1, j, kk) {
            perimeter += sy;
        }
        if !geom.is_set(i + 1, j, kk) {
            perimeter += sy;
        }
        if !geom.is_set(i, j - 1, kk) {
            perimeter += sx;
        }
        if !geom.is_set(i, j + 1, kk) {
            perimeter += sx;
        }
    }

    let outline: Vec<[f64; 3]> = pixels
        .iter()
        .filter(|&&(i, j)| {
            let (i, j) = (i as i64, j as i64);
            !(geom.is_set(i - 1, j, kk)
                && geom.is_set(i + 1, j, kk)
                && geom.is_set(i, j - 1, kk)
                && geom.is_set(i, j + 1, kk))
        })
        .map(|&(i, j)| [i as f64 * sx, j as f64 * sy, 0.0])
        .collect();
    let max_diameter = max_pairwise_sq(&outline).sqrt();

    let phys: Vec<[f64; 2]> = pixels
        .iter()
        .map(|&(i, j)| [i as f64 * sx, j as f64 * sy])
        .collect();
    let [l1, l2] = covariance_eigenvalues_2d(&phys);
    let elongation = if l1 > 0.0 { (l2 / l1).sqrt() } else { 0.0 };

    let sphericity = 2.0 * (std::f64::consts::PI * area).sqrt() / perimeter;

    FeatureBlock::new(
        "shape2d",
        vec![
            ("PixelSurface", area),
            ("Perimeter", perimeter),
            ("PerimeterSurfaceRatio", perimeter / area),
            ("Sphericity2D", sphericity),
            ("SphericalDisproportion2D", 1.0 / sphericity),
            ("MaximumDiameter", max_diameter),
            ("MajorAxisLength", 4.0 * l1.sqrt()),
            ("MinorAxisLength", 4.0 * l2.sqrt()),
            ("Elongation", elongation),
            ("EffectiveDiameter", 2.0 * (area / std::f64::consts::PI).sqrt()),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn roi_from_coords(coords: &[(usize, usize, usize)], spacing: (f64, f64, f64)) -> Roi {
        let lo = coords.iter().fold((usize::MAX, usize::MAX, usize::MAX), |m, c| {
            (m.0.min(c.0), m.1.min(c.1), m.2.min(c.2))
        });
        let hi = coords
            .iter()
            .fold((0, 0, 0), |m: (usize, usize, usize), c| {
                (m.0.max(c.0), m.1.max(c.1), m.2.max(c.2))
            });
        Roi {
            coords: coords.to_vec(),
            intensities: vec![0.0; coords.len()],
            spacing,
            bbox: (lo, hi),
        }
    }

    fn cube(n: usize, spacing: (f64, f64, f64)) -> ShapeGeometry {
        let mut coords = Vec::new();
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    coords.push((i, j, k));
                }
            }
        }
        ShapeGeometry::from_roi(&roi_from_coords(&coords, spacing))
    }

    #[test]
    fn single_voxel_3d() {
        let geom = cube(1, (1.0, 1.0, 1.0));
        let block = shape3d_features(&geom);
        assert_eq!(block.len(), 16);
        assert_eq!(block.get("VoxelVolume"), Some(1.0));
        assert_eq!(block.get("SurfaceArea"), Some(6.0));
        assert_relative_eq!(block.get("Sphericity").unwrap(), 0.80600, epsilon = 1e-5);
        assert_eq!(block.get("Maximum3DDiameter"), Some(0.0));
        assert_eq!(block.get("Elongation"), Some(0.0));
        assert_eq!(block.get("Flatness"), Some(0.0));
    }

    #[test]
    fn two_cube_3d() {
        let geom = cube(2, (1.0, 1.0, 1.0));
        let block = shape3d_features(&geom);
        assert_eq!(block.get("VoxelVolume"), Some(8.0));
        assert_eq!(block.get("SurfaceArea"), Some(24.0));
        assert_eq!(block.get("SurfaceVolumeRatio"), Some(3.0));
        assert_relative_eq!(block.get("Maximum3DDiameter").unwrap(), 3f64.sqrt());
        assert_relative_eq!(block.get("Maximum2DDiameterSlice").unwrap(), 2f64.sqrt());
        assert_relative_eq!(block.get("Maximum2DDiameterColumn").unwrap(), 2f64.sqrt());
        assert_relative_eq!(block.get("Maximum2DDiameterRow").unwrap(), 2f64.sqrt());
        // Isotropic voxel set: unit axis ratios.
        assert_relative_eq!(block.get("Elongation").unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(block.get("Flatness").unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn spherical_disproportion_is_reciprocal_sphericity() {
        let geom = cube(3, (1.0, 2.0, 0.5));
        let block = shape3d_features(&geom);
        assert_relative_eq!(
            block.get("SphericalDisproportion").unwrap(),
            1.0 / block.get("Sphericity").unwrap()
        );
        assert!(block.get("Sphericity").unwrap() > 0.0);
        assert!(block.get("Sphericity").unwrap() <= 1.0);
    }

    #[test]
    fn isotropic_scaling_behaves() {
        let s = 2.5;
        let a = shape3d_features(&cube(3, (1.0, 1.0, 1.0)));
        let b = shape3d_features(&cube(3, (s, s, s)));
        assert_relative_eq!(
            b.get("VoxelVolume").unwrap(),
            a.get("VoxelVolume").unwrap() * s.powi(3),
            max_relative = 1e-9
        );
        assert_relative_eq!(
            b.get("SurfaceArea").unwrap(),
            a.get("SurfaceArea").unwrap() * s * s,
            max_relative = 1e-9
        );
        for name in ["Maximum3DDiameter", "MajorAxisLength", "LeastAxisLength"] {
            assert_relative_eq!(
                b.get(name).unwrap(),
                a.get(name).unwrap() * s,
                max_relative = 1e-9
            );
        }
        for name in ["Sphericity", "Elongation", "Flatness"] {
            assert_relative_eq!(
                b.get(name).unwrap(),
                a.get(name).unwrap(),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn flatness_le_elongation_le_one() {
        // Elongated slab: 6 x 3 x 1 voxels.
        let mut coords = Vec::new();
        for j in 0..3 {
            for i in 0..6 {
                coords.push((i, j, 0));
            }
        }
        let geom = ShapeGeometry::from_roi(&roi_from_coords(&coords, (1.0, 1.0, 1.0)));
        let block = shape3d_features(&geom);
        let e = block.get("Elongation").unwrap();
        let f = block.get("Flatness").unwrap();
        assert!(f <= e && e <= 1.0, "flatness {f} <= elongation {e} <= 1");
        assert_eq!(f, 0.0, "single-slice roi has zero least-axis variance");
    }

    #[test]
    fn single_pixel_2d() {
        let geom = cube(1, (1.0, 1.0, 1.0));
        let block = shape2d_features(&geom);
        assert_eq!(block.len(), 10);
        assert_eq!(block.get("PixelSurface"), Some(1.0));
        assert_eq!(block.get("Perimeter"), Some(4.0));
        assert_relative_eq!(
            block.get("Sphericity2D").unwrap(),
            std::f64::consts::PI.sqrt() / 2.0
        );
    }

    #[test]
    fn square_2d() {
        let geom = cube(2, (1.0, 1.0, 1.0));
        let block = shape2d_features(&geom);
        assert_eq!(block.get("PixelSurface"), Some(4.0));
        assert_eq!(block.get("Perimeter"), Some(8.0));
        assert_relative_eq!(
            block.get("EffectiveDiameter").unwrap(),
            2.0 * (4.0 / std::f64::consts::PI).sqrt()
        );
        assert_relative_eq!(
            block.get("SphericalDisproportion2D").unwrap(),
            1.0 / block.get("Sphericity2D").unwrap()
        );
    }

    #[test]
    fn largest_slice_wins_with_low_k_tiebreak() {
        // Slice k=0 has 1 pixel, k=1 has 3, k=2 has 3 -> k=1 selected.
        let coords = [
            (0, 0, 0),
            (0, 0, 1),
            (1, 0, 1),
            (2, 0, 1),
            (0, 1, 2),
            (1, 1, 2),
            (2, 1, 2),
        ];
        let geom = ShapeGeometry::from_roi(&roi_from_coords(&coords, (1.0, 1.0, 1.0)));
        let block = shape2d_features(&geom);
        assert_eq!(block.get("PixelSurface"), Some(3.0));
        // 1x3 strip: perimeter 2*3 + 2*1 = 8.
        assert_eq!(block.get("Perimeter"), Some(8.0));
        assert_relative_eq!(block.get("MaximumDiameter").unwrap(), 2.0);
    }
}
