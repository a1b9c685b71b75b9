//! Shared stratified folds, detection metrics and the kernel-swap protocol.

mod folds;
mod metrics;
mod protocol;
mod roc;
mod summary;

pub use folds::{stratified_kfold, FoldPlan};
pub use metrics::{confusion_metrics, Confusion, ConfusionMetrics};
pub use protocol::{
    check_kernel_swap, run_protocol, FeatureSet, FittedModel, ModelConfig, Preprocess, ProtocolConfig, ProtocolOutput,
};
pub use roc::{roc_and_eer, roc_curve, RocCurve, RocPoint};
pub use summary::{
    comparisons, diagnostics_rows, score_metrics, Aggregate, DiagnosticsRow, FoldMetrics, FoldPlanRecord, MeanStd,
    ModelSummary, RunSummary, ScoreMetrics, Selection, SolverStatus, Trial,
};
