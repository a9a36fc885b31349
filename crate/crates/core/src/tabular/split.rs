//! Seeded stratified train/test split.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::{FeatureTable, TableError};

/// Split preserving per-class proportions to rounding. Within each class a
/// seeded shuffle picks the test cases; row order inside each partition
/// follows the input table. Both partitions must keep at least one case of
/// every class.
pub fn stratified_split(
    table: &FeatureTable,
    test_fraction: f64,
    seed: u64,
) -> Result<(FeatureTable, FeatureTable), TableError> {
    assert!(
        (0.0..1.0).contains(&test_fraction),
        "test_fraction must be in [0, 1)"
    );
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();

    for label in [0u8, 1u8] {
        let mut class_idx: Vec<usize> = (0..table.n_rows())
            .filter(|&r| table.labels[r] == label)
            .collect();
        let count = class_idx.len();
        let n_test = (count as f64 * test_fraction).round() as usize;
        if n_test == 0 || n_test >= count {
            return Err(TableError::ClassTooSmall {
                label,
                count,
                fraction: test_fraction,
            });
        }
        class_idx.shuffle(&mut rng);
        test_idx.extend(class_idx.iter().take(n_test).copied());
        train_idx.extend(class_idx.iter().skip(n_test).copied());
    }

    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((table.select_rows(&train_idx), table.select_rows(&test_idx)))
}
