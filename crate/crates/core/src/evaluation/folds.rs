use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::digest::{Digest, Hasher};
use crate::error::{Error, Result};
use crate::label::Label;

/// Fold assignment shared by every model of a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    /// Fold index of each sample, in row order.
    pub assignments: Vec<usize>,
}

/// Shuffles each class with a seeded ChaCha stream and deals its members
/// round-robin over the folds. The spoof class starts where the bona fide
/// class stopped so fold totals also differ by at most one.
pub fn stratified_kfold(labels: &[Label], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("fold count must be >= 2, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![usize::MAX; labels.len()];
    let mut offset = 0;
    for class in [Label::Bonafide, Label::Spoof] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(Error::InvalidInput(format!(
                "class {class} has {} samples, fewer than {k} folds",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for (pos, &i) in members.iter().enumerate() {
            assignments[i] = (offset + pos) % k;
        }
        offset = (offset + members.len()) % k;
    }
    Ok(FoldPlan { k, seed, assignments })
}

impl FoldPlan {
    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.assignments[i] != fold).collect()
    }

    pub fn eval_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.assignments[i] == fold).collect()
    }

    /// Digest over the plan and the sample ids it indexes.
    pub fn digest(&self, ids: &[String]) -> Digest {
        let mut h = Hasher::new();
        h.str("fold-plan").u64(self.k as u64).u64(self.seed).u64(ids.len() as u64);
        for (id, &a) in ids.iter().zip(&self.assignments) {
            h.str(id).u64(a as u64);
        }
        h.finish()
    }

    /// Leakage guard: every fold's train and eval splits are disjoint, cover
    /// all samples, and hold both classes.
    pub fn check(&self, labels: &[Label]) -> Result<()> {
        if labels.len() != self.len() {
            return Err(Error::Leakage(format!(
                "fold plan covers {} samples but the data set has {}",
                self.len(),
                labels.len()
            )));
        }
        if let Some(i) = self.assignments.iter().position(|&a| a >= self.k) {
            return Err(Error::Leakage(format!("sample {i} has no valid fold")));
        }
        for fold in 0..self.k {
            let train = self.train_indices(fold);
            let eval = self.eval_indices(fold);
            if train.len() + eval.len() != self.len() || train.iter().any(|i| eval.binary_search(i).is_ok()) {
                return Err(Error::Leakage(format!("fold {fold}: train and eval splits overlap")));
            }
            for (split, idx) in [("train", &train), ("eval", &eval)] {
                let sub: Vec<Label> = idx.iter().map(|&i| labels[i]).collect();
                crate::label::require_both_classes(&sub, &format!("fold {fold} {split} split"))?;
            }
        }
        Ok(())
    }
}
