use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::gram::GramMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_PSD_TOL: f64 = 1e-8;

/// Outcome of the PSD check; `shift` is the diagonal loading applied (0 if none).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub lambda_min: f64,
    pub shift: f64,
}

pub fn min_eigenvalue(values: &ndarray::Array2<f64>) -> f64 {
    let n = values.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| values[(i, j)]);
    m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Validates positive semidefiniteness. Slightly negative spectra (down to
/// `-tol`) are repaired by adding `(−λ_min + 1e-12)·I`; anything below fails.
pub fn psd_floor(mut g: GramMatrix, tol: f64) -> Result<(GramMatrix, PsdReport)> {
    let n = g.n();
    for i in 0..n {
        for j in i + 1..n {
            if g.values[(i, j)] != g.values[(j, i)] {
                return Err(Error::InvalidInput(format!("Gram matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    let lambda_min = min_eigenvalue(&g.values);
    if lambda_min < -tol {
        return Err(Error::NotPsd { lambda_min, tol });
    }
    let shift = if lambda_min < 0.0 { -lambda_min + 1e-12 } else { 0.0 };
    if shift > 0.0 {
        log::debug!("Gram matrix λ_min = {lambda_min:e}; adding {shift:e} to the diagonal");
        for i in 0..n {
            g.values[(i, i)] += shift;
        }
    }
    Ok((g, PsdReport { lambda_min, shift }))
}
