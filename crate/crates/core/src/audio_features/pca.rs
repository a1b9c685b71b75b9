use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fold-specific linear projection onto the top principal directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Array1<f64>,
    /// `[d × D]`, orthonormal rows ordered by descending variance.
    pub components: Array2<f64>,
    /// Variance captured by each component (`σ² / (n − 1)`).
    pub explained_variance: Vec<f64>,
    /// Total variance of the centered training data.
    pub total_variance: f64,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }
}

/// Fits PCA through the SVD of the mean-centered training matrix.
///
/// Each component's largest-magnitude entry is made positive so the fitted
/// model is unique. Fails when fewer than `d` directions carry variance.
pub fn fit_pca(train: ArrayView2<'_, f64>, d: usize) -> Result<PcaModel> {
    let (n, cols) = train.dim();
    if d == 0 || n < 2 || d > (n - 1).min(cols) {
        return Err(Error::InvalidInput(format!(
            "PCA dimension {d} must satisfy 1 <= d <= min(rows - 1, cols) for a {n}x{cols} input"
        )));
    }
    let mean = train
        .mean_axis(Axis(0))
        .ok_or_else(|| Error::InvalidInput("empty PCA input".into()))?;
    let centered = &train - &mean;
    let m = DMatrix::from_fn(n, cols, |i, j| centered[(i, j)]);
    let svd = m.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::InvalidInput("SVD did not produce right singular vectors".into()))?;
    let sigma = &svd.singular_values;

    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));
    let s_max = sigma.iter().copied().fold(0.0, f64::max);
    let tol = n.max(cols) as f64 * f64::EPSILON * s_max;
    let rank = sigma.iter().filter(|&&s| s > tol).count();
    if rank < d {
        return Err(Error::RankDeficient { rank, requested: d });
    }

    let mut components = Array2::zeros((d, cols));
    for (r, &k) in order.iter().take(d).enumerate() {
        let row = v_t.row(k);
        let pivot = (0..cols)
            .max_by(|&a, &b| row[a].abs().total_cmp(&row[b].abs()).then(b.cmp(&a)))
            .unwrap_or(0);
        let sign = if row[pivot] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..cols {
            components[(r, j)] = sign * row[j];
        }
    }
    let denom = (n - 1) as f64;
    let explained_variance = order.iter().take(d).map(|&k| sigma[k] * sigma[k] / denom).collect();
    let total_variance = centered.iter().map(|v| v * v).sum::<f64>() / denom;
    Ok(PcaModel {
        mean,
        components,
        explained_variance,
        total_variance,
    })
}

/// Projects rows onto the fitted components: `(x − mean) · componentsᵀ`.
pub fn apply_pca(x: ArrayView2<'_, f64>, m: &PcaModel) -> Result<Array2<f64>> {
    if x.ncols() != m.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "apply_pca",
            expected: m.input_dim(),
            got: x.ncols(),
        });
    }
    let centered = &x - &m.mean;
    Ok(centered.dot(&m.components.t()))
}
