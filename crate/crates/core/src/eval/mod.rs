//! Cross-validation plans, classification metrics, experiment orchestration
//! and wrapper feature-subset search.

mod experiment;
mod metrics;
mod plan;
mod subset;

pub use experiment::{
    cross_validate, run_design, run_experiment, subgroup_report, ExperimentConfig, ExperimentResult,
    FoldOutcome, GroupMetrics, Leakage, ModelResult, Resampling,
};
pub use metrics::{class_metrics, confusion, kfold_summary, ClassMetrics, ConfusionMatrix, KFoldSummary};
pub use plan::{kfold_plan, loocv_plan, CvMode, Fold, FoldPlan};
pub use subset::{feature_subset_search, rank, SearchStrategy, SubsetScore, EXHAUSTIVE_MAX_SIZE};
