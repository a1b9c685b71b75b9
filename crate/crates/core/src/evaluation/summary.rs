//! Per-fold results and their aggregation. Everything here is a pure
//! function of stored per-fold values, so a report can re-derive it.

use serde::{Deserialize, Serialize};

use super::metrics::{confusion_metrics, Confusion};
use super::roc::roc_and_eer;
use super::ModelConfig;
use crate::diagnostics::{
    mean, robustness_index, sample_std, sec_score, sep_score, zscores, ComparisonReport,
};
use crate::digest::Digest;
use crate::error::Result;
use crate::kernels::{KernelFamily, KernelSpec, PsdReport};
use crate::label::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub id: String,
    pub label: Label,
    /// Spoof-oriented score: the negated SVM decision value.
    pub score: f64,
}

/// Hyperparameters chosen by the inner split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub kernel: KernelSpec,
    pub c: f64,
    /// Mean EER over the inner folds; absent when the grid had one point.
    pub inner_eer: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverStatus {
    pub converged: bool,
    pub iterations: usize,
    pub kkt_gap: f64,
    pub n_support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub confusion: Confusion,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub fpr: f64,
    pub eer: f64,
    pub margin: f64,
    pub w_norm_sq: f64,
    pub selection: Selection,
    pub solver: SolverStatus,
    pub psd: PsdReport,
    pub fold_plan_digest: Digest,
    pub upstream_digest: Digest,
    pub gram_spec_digest: Digest,
    pub trials: Vec<Trial>,
}

/// Threshold-0 confusion metrics and EER from stored trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreMetrics {
    pub confusion: Confusion,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub fpr: f64,
    pub eer: f64,
}

pub fn score_metrics(trials: &[Trial]) -> Result<ScoreMetrics> {
    let scores: Vec<f64> = trials.iter().map(|t| t.score).collect();
    let labels: Vec<Label> = trials.iter().map(|t| t.label).collect();
    let m = confusion_metrics(&scores, &labels, 0.0)?;
    let (_, eer) = roc_and_eer(&scores, &labels)?;
    Ok(ScoreMetrics {
        confusion: m.confusion,
        accuracy: m.accuracy,
        precision: m.precision,
        recall: m.recall,
        f1: m.f1,
        fpr: m.fpr,
        eer,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        MeanStd {
            mean: mean(values),
            std: sample_std(values),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub accuracy: MeanStd,
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub f1: MeanStd,
    pub fpr: MeanStd,
    /// Headline EER: mean of the per-fold EERs.
    pub eer: MeanStd,
    /// EER over all folds' trials pooled together.
    pub pooled_eer: f64,
    pub margin: MeanStd,
}

impl Aggregate {
    pub fn from_folds(folds: &[FoldMetrics]) -> Result<Self> {
        let col = |f: fn(&FoldMetrics) -> f64| MeanStd::of(&folds.iter().map(f).collect::<Vec<_>>());
        let pooled: Vec<Trial> = folds.iter().flat_map(|f| f.trials.iter().cloned()).collect();
        Ok(Aggregate {
            accuracy: col(|f| f.accuracy),
            precision: col(|f| f.precision),
            recall: col(|f| f.recall),
            f1: col(|f| f.f1),
            fpr: col(|f| f.fpr),
            eer: col(|f| f.eer),
            pooled_eer: score_metrics(&pooled)?.eer,
            margin: col(|f| f.margin),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub name: String,
    pub family: KernelFamily,
    pub config: ModelConfig,
    pub folds: Vec<FoldMetrics>,
    pub aggregate: Aggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub model: String,
    pub margin_mean: f64,
    pub margin_std: f64,
    pub accuracy_std: f64,
    pub accuracy_std_z: f64,
    pub separability: f64,
    pub security: f64,
    /// `γ − λσ_γ`; proportional, unitless.
    pub robustness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlanRecord {
    pub k: usize,
    pub seed: u64,
    pub digest: Digest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub dataset: String,
    pub feature_digest: Digest,
    pub fold_plan: FoldPlanRecord,
    pub robustness_lambda: f64,
    pub models: Vec<ModelSummary>,
    pub diagnostics: Vec<DiagnosticsRow>,
    /// Every (classical, quantum) pair, `a` classical and `b` quantum.
    pub comparisons: Vec<ComparisonReport>,
}

/// Diagnostics rows for the models of one dataset.
pub fn diagnostics_rows(models: &[ModelSummary], lambda: f64) -> Result<Vec<DiagnosticsRow>> {
    let sigmas: Vec<f64> = models.iter().map(|m| m.aggregate.accuracy.std).collect();
    let z = zscores(&sigmas);
    models
        .iter()
        .zip(z)
        .map(|(m, z)| {
            let a = &m.aggregate;
            Ok(DiagnosticsRow {
                model: m.name.clone(),
                margin_mean: a.margin.mean,
                margin_std: a.margin.std,
                accuracy_std: a.accuracy.std,
                accuracy_std_z: z,
                separability: sep_score(a.margin.mean, a.accuracy.mean, a.fpr.mean)?,
                security: sec_score(a.accuracy.mean, a.margin.mean, z),
                robustness: robustness_index(a.margin.mean, a.margin.std, lambda)?,
            })
        })
        .collect()
}

pub fn comparisons(models: &[ModelSummary]) -> Result<Vec<ComparisonReport>> {
    let series = |m: &ModelSummary| -> (Vec<f64>, Vec<f64>) {
        (m.folds.iter().map(|f| f.eer).collect(), m.folds.iter().map(|f| f.fpr).collect())
    };
    let mut out = Vec::new();
    for a in models.iter().filter(|m| m.family == KernelFamily::Classical) {
        for b in models.iter().filter(|m| m.family == KernelFamily::Quantum) {
            let (ea, fa) = series(a);
            let (eb, fb) = series(b);
            out.push(ComparisonReport::new(&a.name, &ea, &fa, &b.name, &eb, &fb)?);
        }
    }
    Ok(out)
}

impl RunSummary {
    pub fn assemble(
        dataset: &str,
        feature_digest: Digest,
        fold_plan: FoldPlanRecord,
        robustness_lambda: f64,
        models: Vec<ModelSummary>,
    ) -> Result<Self> {
        Ok(RunSummary {
            dataset: dataset.to_string(),
            feature_digest,
            fold_plan,
            robustness_lambda,
            diagnostics: diagnostics_rows(&models, robustness_lambda)?,
            comparisons: comparisons(&models)?,
            models,
        })
    }

    /// Re-derives every metric, aggregate, diagnostic and comparison from the
    /// stored trials and per-fold margins.
    pub fn recompute(&self) -> Result<RunSummary> {
        let mut models = Vec::with_capacity(self.models.len());
        for m in &self.models {
            let mut folds = m.folds.clone();
            for f in &mut folds {
                let s = score_metrics(&f.trials)?;
                f.confusion = s.confusion;
                f.accuracy = s.accuracy;
                f.precision = s.precision;
                f.recall = s.recall;
                f.f1 = s.f1;
                f.fpr = s.fpr;
                f.eer = s.eer;
            }
            models.push(ModelSummary {
                aggregate: Aggregate::from_folds(&folds)?,
                folds,
                ..m.clone()
            });
        }
        RunSummary::assemble(
            &self.dataset,
            self.feature_digest,
            self.fold_plan.clone(),
            self.robustness_lambda,
            models,
        )
    }
}
