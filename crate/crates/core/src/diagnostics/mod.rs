//! Composite separability/security scores, the robustness index and the
//! statistical comparison of two models' per-fold metrics.

mod scores;
mod stats;

pub use scores::{robustness_index, sec_score, sep_score, zscores, DEFAULT_ROBUSTNESS_LAMBDA};
pub use stats::{
    cohens_d, compare_models, ln_gamma, mean, regularized_incomplete_beta, sample_std, student_t_cdf, welch_t_test,
    ComparisonReport, EffectLabel, MetricComparison, WelchTest,
};
