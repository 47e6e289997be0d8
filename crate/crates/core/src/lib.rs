//! Tabular classification pipeline for predicting the short-term outcome of
//! resective epilepsy surgery from pre-operative clinical features.
//!
//! The crate is organised as a straight pipeline:
//!
//! - [`cohort`]: the clinical record model, CSV ingestion, one-hot/z-score
//!   encoding and a synthetic cohort generator driven by published marginals.
//! - [`resample`]: random oversampling, SMOTE, Borderline-SMOTE, SVM-SMOTE and
//!   ADASYN on the encoded feature space.
//! - [`learners`]: ten from-scratch classifiers (tree, forest, MLP, logistic
//!   regression, k-NN, gradient boosting and SVM with four kernels).
//! - [`eval`]: LOOCV / k-fold planning, confusion matrices, per-class metrics,
//!   experiment orchestration with an explicit resampling-leakage switch, and
//!   wrapper feature-subset search.
//! - [`report`]: table layouts (per-class metrics, k-fold summaries) in CSV and
//!   Markdown.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the pipeline uses by default.

pub mod cohort;
pub mod error;
pub mod eval;
pub mod learners;
pub mod report;
pub mod resample;
mod rng;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Encoded design matrix in double precision.
pub type Matrix = cohort::EncodedMatrix<f64>;
/// Encoded design matrix in single precision.
pub type MatrixF32 = cohort::EncodedMatrix<f32>;
/// Raw (unstandardized) design in double precision.
pub type DesignF64 = cohort::Design<f64>;
/// Fitted classifier in double precision.
pub type Model = learners::TrainedModel<f64>;
/// Fitted classifier in single precision.
pub type ModelF32 = learners::TrainedModel<f32>;
/// Oversampling output in double precision.
pub type Resampled = resample::ResampleResult<f64>;
