//! Credit-rating model toolkit.
//!
//! Builds ordinal credit-rating models from per-company-per-year financial
//! statement features. The pipeline covers data loading and completeness
//! filtering, train/test splitting, z-score normalization, SMOTE class
//! balancing, MLP training with a classification or regression head, and an
//! evaluation layer (accuracy, RMS, confusion matrices, trend slopes,
//! correlations against external scores). A synthetic panel generator stands
//! in for proprietary source data so every experiment runs at desk scale.
//!
//! Modules follow the pipeline order:
//!
//! - [`rating_scale`]: the ordered grade alphabet and class-index mapping
//! - [`ingest`]: delimited-file loading, label joins, completeness filter
//! - [`preprocess`]: splitting, normalization, SMOTE oversampling
//! - [`mlp`]: the network itself, losses, backprop, gradient oracle
//! - [`optimizer`]: Adam and plain gradient-descent update rules
//! - [`trainer`]: full-batch training loop and the width sweep
//! - [`evaluate`]: metrics, trend slopes, correlations
//! - [`synth`]: synthetic company-year panel generator
//! - [`model_file`]: versioned model persistence with checksum

pub mod error;
pub mod evaluate;
pub mod ingest;
pub mod mlp;
pub mod model_file;
pub mod optimizer;
pub mod preprocess;
pub mod rating_scale;
pub mod seeds;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
