//! Radiomics pipeline for masked MRI volumes: extract 120 quantitative
//! features per case, standardize and reduce the feature table with PCA,
//! balance the training split with SMOTE, train a small MLP to predict
//! 1p/19q codeletion status and report confusion-matrix metrics.
//!
//! The crate is organized along the pipeline stages:
//!
//! - [`volume`]: NRRD-subset image/mask I/O and geometry validation
//! - [`roi`]: masked voxel extraction and gray-level discretization
//! - [`features`]: the eight feature classes (120 features total)
//! - [`tabular`]: feature table CSV, standardization, PCA, split, SMOTE
//! - [`mlp`]: the dense 8-5-5-1 classifier trained with Adam
//! - [`metrics`]: confusion matrix, sensitivity/specificity/accuracy/precision
//! - [`pipeline`]: fitted end-to-end model, persistence and reports
//! - [`cli`]: the `extract` / `train` / `evaluate` subcommands

pub mod cli;
pub mod features;
pub mod metrics;
pub mod mlp;
pub mod pipeline;
pub mod roi;
pub mod tabular;
pub mod volume;

pub use features::{extract_all, FeatureVector};
pub use roi::BinSpec;
pub use tabular::FeatureTable;
