use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{require_both_classes, Label};
use crate::numfmt::serde_f64;

/// Operating point for "flag spoof when `score >= threshold`".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    #[serde(with = "serde_f64")]
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
    pub fnr: f64,
}

/// Staircase from `(0, 0)` at `+∞` to `(1, 1)` at `−∞`, one point per
/// distinct score in between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

impl RocCurve {
    /// DET coordinates `(fpr, fnr)`.
    pub fn det(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.fpr, p.fnr)).collect()
    }

    /// Linear interpolation of the `(FPR, FNR)` polyline at `FPR = FNR`.
    pub fn eer(&self) -> f64 {
        let pts = &self.points;
        let diff = |p: &RocPoint| p.fpr - p.fnr;
        let k = pts.iter().position(|p| diff(p) >= 0.0).expect("curve ends at fpr = 1, fnr = 0");
        if k == 0 || diff(&pts[k]) == 0.0 {
            return pts[k].fpr;
        }
        let (a, b) = (&pts[k - 1], &pts[k]);
        let t = -diff(a) / (diff(b) - diff(a));
        a.fpr + t * (b.fpr - a.fpr)
    }
}

pub fn roc_curve(scores: &[f64], labels: &[Label]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            context: "roc_curve",
            expected: labels.len(),
            got: scores.len(),
        });
    }
    require_both_classes(labels, "ROC input")?;
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidInput("ROC scores contain NaN".into()));
    }
    let n_pos = labels.iter().filter(|l| l.is_spoof()).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let point = |threshold: f64, tp: usize, fp: usize| {
        let tpr = tp as f64 / n_pos;
        RocPoint {
            threshold,
            fpr: fp as f64 / n_neg,
            tpr,
            fnr: 1.0 - tpr,
        }
    };
    let mut points = vec![point(f64::INFINITY, 0, 0)];
    let (mut tp, mut fp) = (0, 0);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]].is_spoof() {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(point(s, tp, fp));
    }
    points.push(point(f64::NEG_INFINITY, tp, fp));
    Ok(RocCurve { points })
}

pub fn roc_and_eer(scores: &[f64], labels: &[Label]) -> Result<(RocCurve, f64)> {
    let curve = roc_curve(scores, labels)?;
    let eer = curve.eer();
    Ok((curve, eer))
}
