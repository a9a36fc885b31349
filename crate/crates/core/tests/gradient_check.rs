//! Analytic backprop gradients vs central finite differences on random
//! models and batches.

mod common;

use common::gradcheck::{check_model, sample_fixture};

#[test]
fn gradients_match_finite_differences_over_50_seeds() {
    for seed in 0..50u64 {
        let (model, x, y) = sample_fixture(seed, 1.0);
        check_model(&model, &x, &y, &format!("seed {seed}"));
    }
}

#[test]
fn gradients_match_with_larger_weights() {
    // Init weights are tiny; also probe models with scaled-up weights so the
    // ReLU gates and sigmoid curvature are actually exercised.
    for seed in 50..60u64 {
        let (model, x, y) = sample_fixture(seed, 20.0);
        check_model(&model, &x, &y, &format!("scaled seed {seed}"));
    }
}
