//! Shared test fixtures and independent brute-force oracles for the texture
//! matrices. The oracles deliberately avoid the library's grid walk: they
//! work from coordinate pairs, whole-line scans and union-find so that a
//! bug in the implementation cannot hide in its own oracle.

#![allow(dead_code)]

use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use radiomx::features::DIRECTIONS_13;
use radiomx::roi::{discretize, BinSpec, DiscretizedRoi, Roi};
use radiomx::volume::{write_mask, write_volume, MaskVolume, Volume};

pub type Coord = (i64, i64, i64);

/// Voxel -> level lookup in absolute coordinates.
pub fn level_map(droi: &DiscretizedRoi) -> HashMap<Coord, u32> {
    droi.roi
        .coords
        .iter()
        .zip(&droi.levels)
        .map(|(&(i, j, k), &l)| ((i as i64, j as i64, k as i64), l))
        .collect()
}

/// Random non-empty ROI within max dims, discretized to at most `max_ng`
/// levels. Deterministic per seed.
pub fn random_droi(seed: u64, max_dims: (usize, usize, usize), max_ng: u32) -> DiscretizedRoi {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let dims = (
        rng.random_range(1..=max_dims.0),
        rng.random_range(1..=max_dims.1),
        rng.random_range(1..=max_dims.2),
    );
    let ng = rng.random_range(1..=max_ng);
    let mut coords = Vec::new();
    let mut intensities = Vec::new();
    for k in 0..dims.2 {
        for j in 0..dims.1 {
            for i in 0..dims.0 {
                if rng.random_bool(0.6) {
                    coords.push((i, j, k));
                    intensities.push(rng.random_range(1..=ng) as f64);
                }
            }
        }
    }
    if coords.is_empty() {
        coords.push((0, 0, 0));
        intensities.push(1.0);
    }
    let lo = coords.iter().fold(
        (usize::MAX, usize::MAX, usize::MAX),
        |m, c: &(usize, usize, usize)| (m.0.min(c.0), m.1.min(c.1), m.2.min(c.2)),
    );
    let hi = coords
        .iter()
        .fold((0, 0, 0), |m: (usize, usize, usize), c| {
            (m.0.max(c.0), m.1.max(c.1), m.2.max(c.2))
        });
    let roi = Roi {
        coords,
        intensities,
        spacing: (1.0, 1.0, 1.0),
        bbox: (lo, hi),
    };
    discretize(roi, BinSpec::FixedWidth { width: 1.0 })
}

fn chebyshev(a: Coord, b: Coord) -> i64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs()).max((a.2 - b.2).abs())
}

/// GLCM oracle: symmetrized pair counts per direction from exhaustive
/// ordered-pair enumeration over the coordinate list.
pub fn glcm_oracle(droi: &DiscretizedRoi) -> Vec<(Coord, Vec<Vec<f64>>)> {
    let levels = level_map(droi);
    let ng = droi.ng as usize;
    DIRECTIONS_13
        .iter()
        .map(|&(dx, dy, dz)| {
            let d = (i64::from(dx), i64::from(dy), i64::from(dz));
            let mut m = vec![vec![0.0f64; ng]; ng];
            for (&a, &la) in &levels {
                for (&b, &lb) in &levels {
                    let diff = (b.0 - a.0, b.1 - a.1, b.2 - a.2);
                    if diff == d || diff == (-d.0, -d.1, -d.2) {
                        m[(la - 1) as usize][(lb - 1) as usize] += 1.0;
                    }
                }
            }
            (d, m)
        })
        .collect()
}

/// GLRLM oracle: scan every full grid line in each direction and split it
/// into maximal same-level ROI segments.
pub fn glrlm_oracle(droi: &DiscretizedRoi) -> Vec<(Coord, HashMap<(u32, usize), f64>)> {
    let levels = level_map(droi);
    let (lo, hi) = droi.roi.bbox;
    let (lo, hi) = (
        (lo.0 as i64, lo.1 as i64, lo.2 as i64),
        (hi.0 as i64, hi.1 as i64, hi.2 as i64),
    );
    let in_bbox = |c: Coord| {
        (lo.0..=hi.0).contains(&c.0) && (lo.1..=hi.1).contains(&c.1) && (lo.2..=hi.2).contains(&c.2)
    };

    DIRECTIONS_13
        .iter()
        .map(|&(dx, dy, dz)| {
            let d = (i64::from(dx), i64::from(dy), i64::from(dz));
            let mut runs: HashMap<(u32, usize), f64> = HashMap::new();
            // Line starts: bbox cells whose predecessor lies outside the bbox.
            for k in lo.2..=hi.2 {
                for j in lo.1..=hi.1 {
                    for i in lo.0..=hi.0 {
                        let start = (i, j, k);
                        if in_bbox((start.0 - d.0, start.1 - d.1, start.2 - d.2)) {
                            continue;
                        }
                        // Walk the whole line, emitting maximal runs.
                        let mut cur: Option<(u32, usize)> = None;
                        let mut pos = start;
                        while in_bbox(pos) {
                            match (levels.get(&pos), cur) {
                                (Some(&l), Some((cl, len))) if l == cl => {
                                    cur = Some((cl, len + 1));
                                }
                                (Some(&l), prev) => {
                                    if let Some(run) = prev {
                                        *runs.entry(run).or_insert(0.0) += 1.0;
                                    }
                                    cur = Some((l, 1));
                                }
                                (None, Some(run)) => {
                                    *runs.entry(run).or_insert(0.0) += 1.0;
                                    cur = None;
                                }
                                (None, None) => {}
                            }
                            pos = (pos.0 + d.0, pos.1 + d.1, pos.2 + d.2);
                        }
                        if let Some(run) = cur {
                            *runs.entry(run).or_insert(0.0) += 1.0;
                        }
                    }
                }
            }
            (d, runs)
        })
        .collect()
}

/// GLSZM oracle: same-level zones via union-find over all voxel pairs at
/// Chebyshev distance 1.
pub fn glszm_oracle(droi: &DiscretizedRoi) -> HashMap<(u32, usize), f64> {
    let coords: Vec<Coord> = droi
        .roi
        .coords
        .iter()
        .map(|&(i, j, k)| (i as i64, j as i64, k as i64))
        .collect();
    let levels = &droi.levels;
    let n = coords.len();

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if levels[a] == levels[b] && chebyshev(coords[a], coords[b]) == 1 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
    }
    let mut sizes: HashMap<usize, usize> = HashMap::new();
    for v in 0..n {
        let root = find(&mut parent, v);
        *sizes.entry(root).or_insert(0) += 1;
    }
    let mut zones: HashMap<(u32, usize), f64> = HashMap::new();
    for (root, size) in sizes {
        *zones.entry((levels[root], size)).or_insert(0.0) += 1.0;
    }
    zones
}

/// GLDM oracle: dependence per voxel from an exhaustive pair scan.
pub fn gldm_oracle(droi: &DiscretizedRoi, alpha: u32) -> HashMap<(u32, usize), f64> {
    let coords: Vec<Coord> = droi
        .roi
        .coords
        .iter()
        .map(|&(i, j, k)| (i as i64, j as i64, k as i64))
        .collect();
    let levels = &droi.levels;
    let mut matrix: HashMap<(u32, usize), f64> = HashMap::new();
    for a in 0..coords.len() {
        let mut dep = 1usize;
        for b in 0..coords.len() {
            if a != b
                && chebyshev(coords[a], coords[b]) == 1
                && levels[a].abs_diff(levels[b]) <= alpha
            {
                dep += 1;
            }
        }
        *matrix.entry((levels[a], dep)).or_insert(0.0) += 1.0;
    }
    matrix
}

pub mod gradcheck {
    //! Finite-difference gradient checking against the analytic backprop.

    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use radiomx::mlp::{backward, bce_loss, forward, MlpModel};

    pub const FD_STEP: f64 = 1e-5;
    pub const REL_TOL: f64 = 1e-5;
    pub const ABS_FLOOR: f64 = 1e-8;

    fn loss_of(model: &MlpModel, x: &Array2<f64>, y: &[u8]) -> f64 {
        bce_loss(&forward(model, x.view()).unwrap(), y)
    }

    /// Check every parameter of `model` against a central difference.
    pub fn check_model(model: &MlpModel, x: &Array2<f64>, y: &[u8], ctx: &str) {
        let (grads, _, _) = backward(model, x.view(), y).unwrap();
        for l in 0..model.weights.len() {
            let (rows, cols) = model.weights[l].dim();
            for r in 0..rows {
                for c in 0..cols {
                    let mut plus = model.clone();
                    plus.weights[l][[r, c]] += FD_STEP;
                    let mut minus = model.clone();
                    minus.weights[l][[r, c]] -= FD_STEP;
                    let fd = (loss_of(&plus, x, y) - loss_of(&minus, x, y)) / (2.0 * FD_STEP);
                    compare(grads.weights[l][[r, c]], fd, &format!("{ctx} W{l}[{r},{c}]"));
                }
            }
            for b in 0..model.biases[l].len() {
                let mut plus = model.clone();
                plus.biases[l][b] += FD_STEP;
                let mut minus = model.clone();
                minus.biases[l][b] -= FD_STEP;
                let fd = (loss_of(&plus, x, y) - loss_of(&minus, x, y)) / (2.0 * FD_STEP);
                compare(grads.biases[l][b], fd, &format!("{ctx} b{l}[{b}]"));
            }
        }
    }

    fn compare(analytic: f64, fd: f64, ctx: &str) {
        let diff = (analytic - fd).abs();
        let scale = analytic.abs().max(fd.abs());
        assert!(
            diff <= ABS_FLOOR || diff <= REL_TOL * scale,
            "{ctx}: analytic {analytic} vs fd {fd} (diff {diff})"
        );
    }

    /// Central differences are only valid where the loss is locally smooth:
    /// a ReLU pre-activation inside the probe step or a probability at the
    /// clamp boundary makes the two-sided difference measure the wrong
    /// branch. Reject fixtures whose pre-activations come near a kink.
    fn kink_free(model: &MlpModel, x: &Array2<f64>, margin: f64) -> bool {
        let n_layers = model.weights.len();
        let mut a = x.clone();
        for l in 0..n_layers {
            let z = a.dot(&model.weights[l].t()) + &model.biases[l];
            if l + 1 == n_layers {
                // Keep the logit well inside the sigmoid clamp window.
                return z.iter().all(|&v| v.abs() < 15.0);
            }
            if z.iter().any(|&v| v.abs() < margin) {
                return false;
            }
            a = z.mapv(|v| v.max(0.0));
        }
        unreachable!()
    }

    /// Random kink-free (model, batch, labels) fixture; `scale` multiplies
    /// the freshly initialized weights.
    pub fn sample_fixture(seed: u64, scale: f64) -> (MlpModel, Array2<f64>, Vec<u8>) {
        for attempt in 0..1000u64 {
            let mut rng = ChaCha20Rng::seed_from_u64(seed * 1009 + attempt);
            let input_dim = rng.random_range(2..=8);
            let batch = rng.random_range(1..=6);
            let mut model = MlpModel::init(input_dim, seed * 31 + attempt);
            if scale != 1.0 {
                for w in &mut model.weights {
                    w.mapv_inplace(|v| v * scale);
                }
            }
            let x = Array2::from_shape_fn((batch, input_dim), |_| rng.random_range(-2.0..2.0));
            let y: Vec<u8> = (0..batch).map(|_| u8::from(rng.random_bool(0.5))).collect();
            if kink_free(&model, &x, 1e-3) {
                return (model, x, y);
            }
        }
        panic!("no kink-free fixture found for seed {seed}");
    }
}

/// Write one synthetic image/mask pair as NRRD files and return their paths.
///
/// Class 1 cases carry a brighter, smoother intensity ramp than class 0, so
/// a classifier trained on the extracted features has real signal.
pub fn write_phantom_case(
    dir: &Path,
    case_id: &str,
    seed: u64,
    class: u8,
) -> (std::path::PathBuf, std::path::PathBuf) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let dims = (7, 6, 3);
    let spacing = (1.0, 1.0, 2.0);
    let n = dims.0 * dims.1 * dims.2;

    let data: Vec<f64> = (0..n)
        .map(|idx| {
            let i = idx % dims.0;
            let base = if class == 1 {
                120.0 + 8.0 * i as f64
            } else {
                60.0
            };
            let noise_amp = if class == 1 { 5.0 } else { 40.0 };
            base + rng.random_range(-noise_amp..noise_amp)
        })
        .collect();
    let img = Volume::new(dims, spacing, data).unwrap();

    // Blob mask: an ellipsoid around the grid center, label 1.
    let mut labels = vec![0u32; n];
    for k in 0..dims.2 {
        for j in 0..dims.1 {
            for i in 0..dims.0 {
                let di = (i as f64 - 3.0) / 2.8;
                let dj = (j as f64 - 2.5) / 2.3;
                let dk = (k as f64 - 1.0) / 1.2;
                if di * di + dj * dj + dk * dk <= 1.0 {
                    labels[i + dims.0 * (j + dims.1 * k)] = 1;
                }
            }
        }
    }
    let mask = MaskVolume::new(dims, spacing, labels).unwrap();

    let image_path = dir.join(format!("{case_id}.nrrd"));
    let mask_path = dir.join(format!("{case_id}_mask.nrrd"));
    write_volume(&image_path, &img).unwrap();
    write_mask(&mask_path, &mask).unwrap();
    (image_path, mask_path)
}

/// Write a manifest CSV for phantom cases: `class_of(i)` decides each label.
pub fn write_phantom_manifest(
    dir: &Path,
    n_cases: usize,
    class_of: impl Fn(usize) -> u8,
) -> std::path::PathBuf {
    use std::io::Write;
    let manifest_path = dir.join("manifest.csv");
    let mut f = std::fs::File::create(&manifest_path).unwrap();
    writeln!(f, "case_id,image_path,mask_path,roi_label,label").unwrap();
    for c in 0..n_cases {
        let class = class_of(c);
        let case_id = format!("case{c:03}");
        let (img, mask) = write_phantom_case(dir, &case_id, 1000 + c as u64, class);
        writeln!(
            f,
            "{case_id},{},{},1,{class}",
            img.display(),
            mask.display()
        )
        .unwrap();
    }
    manifest_path
}

/// NGTDM oracle: neighborhood means from an exhaustive pair scan, iterating
/// voxels in ROI order so float accumulation matches the implementation.
pub fn ngtdm_oracle(droi: &DiscretizedRoi) -> (Vec<f64>, Vec<f64>) {
    let coords: Vec<Coord> = droi
        .roi
        .coords
        .iter()
        .map(|&(i, j, k)| (i as i64, j as i64, k as i64))
        .collect();
    let levels = &droi.levels;
    let ng = droi.ng as usize;
    let mut n = vec![0.0f64; ng];
    let mut s = vec![0.0f64; ng];
    for a in 0..coords.len() {
        n[(levels[a] - 1) as usize] += 1.0;
        let mut sum = 0.0;
        let mut count = 0usize;
        for b in 0..coords.len() {
            if a != b && chebyshev(coords[a], coords[b]) == 1 {
                sum += f64::from(levels[b]);
                count += 1;
            }
        }
        if count > 0 {
            s[(levels[a] - 1) as usize] += (f64::from(levels[a]) - sum / count as f64).abs();
        }
    }
    (n, s)
}
