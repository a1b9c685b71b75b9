use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{require_both_classes, Label};

/// Confusion counts with spoof as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMetrics {
    pub confusion: Confusion,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub fpr: f64,
}

impl Confusion {
    pub fn metrics(self) -> ConfusionMetrics {
        let Confusion { tp, fp, tn, fn_ } = self;
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        ConfusionMetrics {
            confusion: self,
            accuracy: ratio(tp + tn, tp + fp + tn + fn_),
            precision,
            recall,
            f1,
            fpr: ratio(fp, fp + tn),
        }
    }
}

/// Scores are spoof-oriented: a trial is flagged spoof when `score >= threshold`.
pub fn confusion_metrics(scores: &[f64], labels: &[Label], threshold: f64) -> Result<ConfusionMetrics> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            context: "confusion_metrics",
            expected: labels.len(),
            got: scores.len(),
        });
    }
    require_both_classes(labels, "evaluation split")?;
    let mut c = Confusion { tp: 0, fp: 0, tn: 0, fn_: 0 };
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= threshold, l.is_spoof()) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c.metrics())
}
