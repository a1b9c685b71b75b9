//! The matched kernel-swap protocol: one fold plan and one preprocessing
//! pipeline, then per-model Gram construction, inner model selection,
//! training and held-out scoring.

use std::collections::{BTreeMap, BTreeSet};

use ndarray::{Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::{stratified_kfold, FoldPlan};
use super::summary::{
    score_metrics, Aggregate, FoldMetrics, FoldPlanRecord, ModelSummary, RunSummary, Selection, SolverStatus, Trial,
};
use crate::audio_features::{apply_minmax, apply_pca, fit_minmax, fit_pca, PcaModel, ScalerParams};
use crate::diagnostics::DEFAULT_ROBUSTNESS_LAMBDA;
use crate::digest::{Digest, Hasher};
use crate::error::{Error, Result};
use crate::kernels::{build_gram, cross_gram, psd_floor, GramCache, KernelFamily, KernelSpec, DEFAULT_PSD_TOL};
use crate::label::Label;
use crate::numfmt::round_sig;
use crate::svm::{self, SolverConfig, TrainedSvm};
use crate::FeatureMatrix;

/// Labelled feature rows before fold-specific scaling and PCA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub ids: Vec<String>,
    pub labels: Vec<Label>,
    pub features: FeatureMatrix,
}

impl FeatureSet {
    pub fn new(ids: Vec<String>, labels: Vec<Label>, features: FeatureMatrix) -> Result<Self> {
        if ids.len() != labels.len() || ids.len() != features.nrows() {
            return Err(Error::DimensionMismatch {
                context: "feature set rows",
                expected: ids.len(),
                got: labels.len().min(features.nrows()),
            });
        }
        let mut seen = BTreeSet::new();
        if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(Error::InvalidInput(format!("duplicate sample id {dup:?}")));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("feature matrix contains non-finite values".into()));
        }
        Ok(FeatureSet { ids, labels, features })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Rows reordered by id, so results do not depend on input order.
    pub fn sorted(&self) -> FeatureSet {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.ids[a].cmp(&self.ids[b]));
        FeatureSet {
            ids: order.iter().map(|&i| self.ids[i].clone()).collect(),
            labels: order.iter().map(|&i| self.labels[i]).collect(),
            features: self.features.select(Axis(0), &order),
        }
    }

    pub fn digest(&self) -> Digest {
        let mut h = Hasher::new();
        h.str("feature-set").u64(self.len() as u64).u64(self.features.ncols() as u64);
        for (i, (id, label)) in self.ids.iter().zip(&self.labels).enumerate() {
            h.str(id).str(label.as_str()).f64s(self.features.row(i).iter().copied());
        }
        h.finish()
    }
}

/// Fold-level preprocessing: min-max scaling then PCA to `pca_dim`.
/// `seed` is recorded in the provenance digest; the SVD itself is
/// deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Preprocess {
    pub pca_dim: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub name: String,
    /// Candidate kernels, all of one family; the inner split picks one.
    pub kernels: Vec<KernelSpec>,
    pub c_grid: Vec<f64>,
    pub kkt_tol: f64,
    pub max_passes: usize,
    pub preprocess: Preprocess,
}

impl ModelConfig {
    pub fn family(&self) -> KernelFamily {
        self.kernels[0].family()
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::InvalidConfig(format!("model {}: {m}", self.name)));
        if self.name.is_empty() {
            return Err(Error::InvalidConfig("model name must not be empty".into()));
        }
        if self.kernels.is_empty() {
            return err("kernel grid is empty".into());
        }
        if self.c_grid.is_empty() {
            return err("C grid is empty".into());
        }
        for k in &self.kernels {
            k.validate()?;
            if k.family() != self.family() {
                return err("kernel grid mixes classical and quantum kernels".into());
            }
            if let KernelSpec::Quantum { feature_map } = k {
                if feature_map.n_qubits != self.preprocess.pca_dim {
                    return err(format!(
                        "{} qubits but PCA dimension {}",
                        feature_map.n_qubits, self.preprocess.pca_dim
                    ));
                }
            }
        }
        for &c in &self.c_grid {
            self.solver(c).validate()?;
        }
        if self.preprocess.pca_dim == 0 {
            return err("PCA dimension must be >= 1".into());
        }
        Ok(())
    }

    fn solver(&self, c: f64) -> SolverConfig {
        SolverConfig {
            c,
            kkt_tol: self.kkt_tol,
            max_passes: self.max_passes,
            seed: self.preprocess.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub dataset: String,
    pub k: usize,
    pub fold_seed: u64,
    pub inner_k: usize,
    pub tile: usize,
    pub psd_tol: f64,
    pub robustness_lambda: f64,
    pub models: Vec<ModelConfig>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            dataset: "dataset".into(),
            k: 5,
            fold_seed: 0,
            inner_k: 3,
            tile: 32,
            psd_tol: DEFAULT_PSD_TOL,
            robustness_lambda: DEFAULT_ROBUSTNESS_LAMBDA,
            models: Vec::new(),
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.inner_k < 2 {
            return Err(Error::InvalidConfig(format!("inner fold count must be >= 2, got {}", self.inner_k)));
        }
        if self.tile == 0 {
            return Err(Error::InvalidConfig("tile must be >= 1".into()));
        }
        if !(self.robustness_lambda > 0.0) {
            return Err(Error::InvalidConfig("robustness lambda must be positive".into()));
        }
        let mut names = BTreeSet::new();
        for m in &self.models {
            if !names.insert(m.name.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate model name {:?}", m.name)));
            }
            m.validate()?;
        }
        for family in [KernelFamily::Classical, KernelFamily::Quantum] {
            if !self.models.iter().any(|m| m.family() == family) {
                return Err(Error::InvalidConfig(format!(
                    "the protocol needs at least one {} model",
                    match family {
                        KernelFamily::Classical => "classical",
                        KernelFamily::Quantum => "quantum",
                    }
                )));
            }
        }
        Ok(())
    }
}

/// A trained per-fold model together with what is needed to re-score it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub model: String,
    pub fold: usize,
    pub kernel: KernelSpec,
    pub gram_spec_digest: Digest,
    pub upstream_digest: Digest,
    pub train_ids: Vec<String>,
    pub svm: TrainedSvm,
}

#[derive(Debug, Clone)]
pub struct ProtocolOutput {
    pub summary: RunSummary,
    pub fitted: Vec<FittedModel>,
}

struct FoldData {
    train_idx: Vec<usize>,
    eval_idx: Vec<usize>,
    x_train: Array2<f64>,
    x_eval: Array2<f64>,
    digest: Digest,
}

fn preprocess_fold(
    fs: &FeatureSet,
    plan: &FoldPlan,
    plan_digest: &Digest,
    feature_digest: &Digest,
    fold: usize,
    pre: Preprocess,
) -> Result<FoldData> {
    let train_idx = plan.train_indices(fold);
    let eval_idx = plan.eval_indices(fold);
    let raw_train = fs.features.select(Axis(0), &train_idx);
    let raw_eval = fs.features.select(Axis(0), &eval_idx);
    let scaler = fit_minmax(raw_train.view())?;
    let scaled_train = apply_minmax(raw_train.view(), &scaler)?;
    let pca = fit_pca(scaled_train.view(), pre.pca_dim)?;
    let x_train = apply_pca(scaled_train.view(), &pca)?;
    let x_eval = apply_pca(apply_minmax(raw_eval.view(), &scaler)?.view(), &pca)?;
    let digest = upstream_digest(feature_digest, plan_digest, fold, pre, &scaler, &pca, &x_train, &x_eval);
    Ok(FoldData {
        train_idx,
        eval_idx,
        x_train,
        x_eval,
        digest,
    })
}

#[allow(clippy::too_many_arguments)]
fn upstream_digest(
    features: &Digest,
    plan: &Digest,
    fold: usize,
    pre: Preprocess,
    scaler: &ScalerParams,
    pca: &PcaModel,
    x_train: &Array2<f64>,
    x_eval: &Array2<f64>,
) -> Digest {
    let mut h = Hasher::new();
    h.str("upstream").digest(features).digest(plan).u64(fold as u64);
    h.u64(pre.pca_dim as u64).u64(pre.seed);
    h.f64s(scaler.min.iter().copied()).f64s(scaler.max.iter().copied());
    h.f64s(pca.mean.iter().copied()).f64s(pca.components.iter().copied());
    h.f64s(x_train.iter().copied()).f64s(x_eval.iter().copied());
    h.finish()
}

fn inner_seed(seed: u64, fold: usize) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(fold as u64 + 1)
}

fn signs(labels: &[Label]) -> Vec<f64> {
    labels.iter().map(|l| l.sign()).collect()
}

fn spoof_scores(svm: &TrainedSvm, cross: &Array2<f64>) -> Result<Vec<f64>> {
    Ok(svm.decision_scores(cross.view())?.into_iter().map(|f| round_sig(-f)).collect())
}

/// Mean inner-fold EER for one (kernel, C) point on the outer-train Gram.
fn inner_eer(gram: &Array2<f64>, labels: &[Label], inner: &FoldPlan, solver: &SolverConfig) -> Result<f64> {
    let mut total = 0.0;
    for f in 0..inner.k {
        let tr = inner.train_indices(f);
        let ev = inner.eval_indices(f);
        let g = gram.select(Axis(0), &tr).select(Axis(1), &tr);
        let y: Vec<Label> = tr.iter().map(|&i| labels[i]).collect();
        let model = svm::train(g.view(), &signs(&y), solver)?;
        let cross = gram.select(Axis(0), &ev).select(Axis(1), &tr);
        let scores = spoof_scores(&model, &cross)?;
        let ev_labels: Vec<Label> = ev.iter().map(|&i| labels[i]).collect();
        total += super::roc::roc_and_eer(&scores, &ev_labels)?.1;
    }
    Ok(total / inner.k as f64)
}

struct FoldRun {
    metrics: FoldMetrics,
    fitted: FittedModel,
}

fn run_model_fold(
    fs: &FeatureSet,
    cfg: &ProtocolConfig,
    model: &ModelConfig,
    fold: usize,
    data: &FoldData,
    plan_digest: Digest,
    cache: Option<&GramCache>,
) -> Result<FoldRun> {
    let train_ids: Vec<String> = data.train_idx.iter().map(|&i| fs.ids[i].clone()).collect();
    let train_labels: Vec<Label> = data.train_idx.iter().map(|&i| fs.labels[i]).collect();
    let y = signs(&train_labels);

    let mut grams = Vec::with_capacity(model.kernels.len());
    for spec in &model.kernels {
        let g = build_gram(data.x_train.view(), &train_ids, spec, cfg.tile, cache)?;
        grams.push(psd_floor(g, cfg.psd_tol)?);
    }

    let grid: Vec<(usize, f64)> = (0..model.kernels.len())
        .flat_map(|k| model.c_grid.iter().map(move |&c| (k, c)))
        .collect();
    let (best_kernel, best_c, inner) = if grid.len() == 1 {
        (grid[0].0, grid[0].1, None)
    } else {
        let inner_plan = stratified_kfold(&train_labels, cfg.inner_k, inner_seed(cfg.fold_seed, fold))?;
        let eers = grid
            .par_iter()
            .map(|&(k, c)| inner_eer(&grams[k].0.values, &train_labels, &inner_plan, &model.solver(c)))
            .collect::<Result<Vec<f64>>>()?;
        let mut best = 0;
        for (i, e) in eers.iter().enumerate() {
            if *e < eers[best] {
                best = i;
            }
        }
        (grid[best].0, grid[best].1, Some(eers[best]))
    };

    let (gram, psd) = &grams[best_kernel];
    let spec = &model.kernels[best_kernel];
    let trained = svm::train(gram.values.view(), &y, &model.solver(best_c))?;
    let context = format!("model {} fold {fold}", model.name);
    let margin = trained.margin_in(&context)?;
    let cross = cross_gram(data.x_eval.view(), data.x_train.view(), spec)?;
    let scores = spoof_scores(&trained, &cross)?;
    let trials: Vec<Trial> = data
        .eval_idx
        .iter()
        .zip(scores)
        .map(|(&i, score)| Trial {
            id: fs.ids[i].clone(),
            label: fs.labels[i],
            score,
        })
        .collect();
    let s = score_metrics(&trials)?;
    if !trained.converged {
        log::warn!("{context}: solver hit the update limit (KKT gap {:e})", trained.kkt_gap);
    }
    let metrics = FoldMetrics {
        fold,
        confusion: s.confusion,
        accuracy: s.accuracy,
        precision: s.precision,
        recall: s.recall,
        f1: s.f1,
        fpr: s.fpr,
        eer: s.eer,
        margin,
        w_norm_sq: trained.w_norm_sq,
        selection: Selection {
            kernel: spec.clone(),
            c: best_c,
            inner_eer: inner,
        },
        solver: SolverStatus {
            converged: trained.converged,
            iterations: trained.iterations,
            kkt_gap: trained.kkt_gap,
            n_support: trained.support_indices.len(),
        },
        psd: *psd,
        fold_plan_digest: plan_digest,
        upstream_digest: data.digest,
        gram_spec_digest: gram.spec_digest,
        trials,
    };
    let fitted = FittedModel {
        model: model.name.clone(),
        fold,
        kernel: spec.clone(),
        gram_spec_digest: gram.spec_digest,
        upstream_digest: data.digest,
        train_ids,
        svm: trained,
    };
    Ok(FoldRun { metrics, fitted })
}

/// Asserts that every model sees byte-identical upstream data in every fold.
pub fn check_kernel_swap(models: &[(&str, Vec<Digest>)]) -> Result<()> {
    let Some((ref_name, ref_digests)) = models.first() else {
        return Ok(());
    };
    for (name, digests) in &models[1..] {
        for (fold, (a, b)) in ref_digests.iter().zip(digests).enumerate() {
            if a != b {
                return Err(Error::KernelSwap(format!(
                    "fold {fold}: upstream data of model {name} ({}) differs from model {ref_name} ({})",
                    &b.to_hex()[..12],
                    &a.to_hex()[..12]
                )));
            }
        }
    }
    Ok(())
}

pub fn run_protocol(features: &FeatureSet, cfg: &ProtocolConfig, cache: Option<&GramCache>) -> Result<ProtocolOutput> {
    cfg.validate()?;
    let fs = features.sorted();
    let feature_digest = fs.digest();
    let plan = stratified_kfold(&fs.labels, cfg.k, cfg.fold_seed)?;
    plan.check(&fs.labels)?;
    for fold in 0..cfg.k {
        let train: Vec<Label> = plan.train_indices(fold).iter().map(|&i| fs.labels[i]).collect();
        for class in [Label::Bonafide, Label::Spoof] {
            let n = train.iter().filter(|&&l| l == class).count();
            if n < cfg.inner_k {
                return Err(Error::InvalidInput(format!(
                    "fold {fold}: {n} {class} training samples cannot fill {} inner folds",
                    cfg.inner_k
                )));
            }
        }
    }
    let plan_digest = plan.digest(&fs.ids);

    let pres: BTreeSet<Preprocess> = cfg.models.iter().map(|m| m.preprocess).collect();
    let jobs: Vec<(Preprocess, usize)> = pres.iter().flat_map(|&p| (0..cfg.k).map(move |f| (p, f))).collect();
    let prepared = jobs
        .par_iter()
        .map(|&(p, f)| preprocess_fold(&fs, &plan, &plan_digest, &feature_digest, f, p))
        .collect::<Result<Vec<_>>>()?;
    let data: BTreeMap<(Preprocess, usize), FoldData> = jobs.into_iter().zip(prepared).collect();

    let upstream: Vec<(&str, Vec<Digest>)> = cfg
        .models
        .iter()
        .map(|m| (m.name.as_str(), (0..cfg.k).map(|f| data[&(m.preprocess, f)].digest).collect()))
        .collect();
    check_kernel_swap(&upstream)?;

    let work: Vec<(usize, usize)> = (0..cfg.models.len()).flat_map(|m| (0..cfg.k).map(move |f| (m, f))).collect();
    let runs = work
        .par_iter()
        .map(|&(m, f)| {
            let model = &cfg.models[m];
            run_model_fold(&fs, cfg, model, f, &data[&(model.preprocess, f)], plan_digest, cache)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut runs = runs.into_iter();
    let mut summaries = Vec::with_capacity(cfg.models.len());
    let mut fitted = Vec::with_capacity(work.len());
    for model in &cfg.models {
        let mut folds = Vec::with_capacity(cfg.k);
        for _ in 0..cfg.k {
            let run = runs.next().expect("one result per job");
            folds.push(run.metrics);
            fitted.push(run.fitted);
        }
        if folds.iter().any(|f| f.fold_plan_digest != plan_digest) {
            return Err(Error::KernelSwap(format!("model {} used a different fold plan", model.name)));
        }
        summaries.push(ModelSummary {
            name: model.name.clone(),
            family: model.family(),
            config: model.clone(),
            aggregate: Aggregate::from_folds(&folds)?,
            folds,
        });
    }
    let summary = RunSummary::assemble(
        &cfg.dataset,
        feature_digest,
        FoldPlanRecord {
            k: plan.k,
            seed: plan.seed,
            digest: plan_digest,
        },
        cfg.robustness_lambda,
        summaries,
    )?;
    Ok(ProtocolOutput { summary, fitted })
}
