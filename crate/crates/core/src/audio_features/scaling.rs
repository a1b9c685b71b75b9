use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-feature min/max fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub fn fit_minmax(train: ArrayView2<'_, f64>) -> Result<ScalerParams> {
    if train.nrows() < 2 || train.ncols() == 0 {
        return Err(Error::InvalidInput(format!(
            "min-max scaling needs at least 2 rows and 1 column, got {:?}",
            train.dim()
        )));
    }
    let min = train
        .axis_iter(Axis(1))
        .map(|c| c.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    let max = train
        .axis_iter(Axis(1))
        .map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    Ok(ScalerParams { min, max })
}

/// Maps each column to `[0, 1]` using the fitted range. Constant training
/// columns map to 0 and out-of-range evaluation values are clamped.
pub fn apply_minmax(x: ArrayView2<'_, f64>, p: &ScalerParams) -> Result<Array2<f64>> {
    if x.ncols() != p.min.len() {
        return Err(Error::DimensionMismatch {
            context: "apply_minmax",
            expected: p.min.len(),
            got: x.ncols(),
        });
    }
    let mut out = x.to_owned();
    for mut row in out.rows_mut() {
        for ((v, &lo), &hi) in row.iter_mut().zip(&p.min).zip(&p.max) {
            let range = hi - lo;
            *v = if range > 0.0 {
                ((*v - lo) / range).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
    }
    Ok(out)
}
