//! Soft-margin SVM trained on a precomputed Gram matrix.
//!
//! The dual `max Σα − ½ αᵀ(yyᵀ∘K)α` subject to `0 ≤ α ≤ C`, `Σ αᵢyᵢ = 0` is
//! solved by sequential pairwise updates (see [`smo`]). Decision scores are
//! `f(x) = Σⱼ αⱼ yⱼ K(x, xⱼ) + b` and the geometric margin is `2 / ‖w‖` with
//! `‖w‖² = αᵀ(yyᵀ∘K)α`.

mod smo;

pub use smo::{dual_objective, train, train_traced};

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub c: f64,
    /// Stop once the maximal KKT violation (pair gap) is at most this.
    pub kkt_tol: f64,
    /// Update budget in units of `N` pairwise updates.
    pub max_passes: usize,
    /// Recorded with the model; the solver itself is deterministic.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            c: 1.0,
            kkt_tol: 1e-3,
            max_passes: 1000,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_c(c: f64) -> Self {
        SolverConfig {
            c,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidConfig(format!("C must be positive, got {}", self.c)));
        }
        if !(self.kkt_tol.is_finite() && self.kkt_tol > 0.0) {
            return Err(Error::InvalidConfig(format!("kkt_tol must be positive, got {}", self.kkt_tol)));
        }
        if self.max_passes == 0 {
            return Err(Error::InvalidConfig("max_passes must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedSvm {
    pub alphas: Vec<f64>,
    pub bias: f64,
    /// Targets in `{−1, +1}` (bona fide `+1`).
    pub labels: Vec<f64>,
    pub support_indices: Vec<usize>,
    pub w_norm_sq: f64,
    pub c: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Maximal KKT violation at return.
    pub kkt_gap: f64,
    pub dual_objective: f64,
}

impl TrainedSvm {
    /// Scores rows of a `[n_eval × n_train]` cross-kernel matrix.
    pub fn decision_scores(&self, cross: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        if cross.ncols() != self.alphas.len() {
            return Err(Error::DimensionMismatch {
                context: "decision_scores",
                expected: self.alphas.len(),
                got: cross.ncols(),
            });
        }
        Ok(cross
            .rows()
            .into_iter()
            .map(|row| {
                self.support_indices
                    .iter()
                    .map(|&j| self.alphas[j] * self.labels[j] * row[j])
                    .sum::<f64>()
                    + self.bias
            })
            .collect())
    }

    /// Geometric margin `2 / ‖w‖`.
    pub fn margin(&self) -> Result<f64> {
        self.margin_in("model")
    }

    /// As [`TrainedSvm::margin`], naming `context` (e.g. the fold) on failure.
    pub fn margin_in(&self, context: &str) -> Result<f64> {
        if !(self.w_norm_sq > 1e-15) {
            return Err(Error::DegenerateMargin {
                context: context.to_string(),
                w_norm_sq: self.w_norm_sq,
            });
        }
        Ok(2.0 / self.w_norm_sq.sqrt())
    }

    /// Per-sample KKT residuals against the returned bias, given the
    /// training Gram matrix.
    pub fn kkt_residuals(&self, gram: ArrayView2<'_, f64>) -> Vec<f64> {
        let n = self.alphas.len();
        (0..n)
            .map(|i| {
                let f: f64 = (0..n).map(|j| self.alphas[j] * self.labels[j] * gram[(i, j)]).sum::<f64>() + self.bias;
                let yf = self.labels[i] * f;
                let a = self.alphas[i];
                if a <= 0.0 {
                    (1.0 - yf).max(0.0)
                } else if a >= self.c {
                    (yf - 1.0).max(0.0)
                } else {
                    (yf - 1.0).abs()
                }
            })
            .collect()
    }
}
