use crate::error::{Error, Result};

pub const DEFAULT_ROBUSTNESS_LAMBDA: f64 = 1.0;

fn unit_interval(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidInput(format!("{name} must lie in [0, 1], got {v}")));
    }
    Ok(())
}

/// `0.4·γ + 0.3·Acc + 0.3·(1 − FPR)` on fold means.
pub fn sep_score(margin_mean: f64, acc_mean: f64, fpr_mean: f64) -> Result<f64> {
    unit_interval("accuracy", acc_mean)?;
    unit_interval("fpr", fpr_mean)?;
    if !(margin_mean >= 0.0) {
        return Err(Error::InvalidInput(format!("margin must be non-negative, got {margin_mean}")));
    }
    Ok(0.4 * margin_mean + 0.3 * acc_mean + 0.3 * (1.0 - fpr_mean))
}

/// `0.4·Acc + 0.4·γ − 0.2·σ_z`, where `σ_z` is the accuracy spread z-scored
/// across the models of one dataset (see [`zscores`]).
pub fn sec_score(acc_mean: f64, margin_mean: f64, sigma_acc_z: f64) -> f64 {
    0.4 * acc_mean + 0.4 * margin_mean - 0.2 * sigma_acc_z
}

/// `γ − λ·σ_γ`, a unitless diagnostic.
pub fn robustness_index(margin_mean: f64, margin_sigma: f64, lambda: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidConfig(format!("robustness lambda must be positive, got {lambda}")));
    }
    Ok(margin_mean - lambda * margin_sigma)
}

/// Z-scores with the sample standard deviation. Fewer than two values or
/// zero spread map every entry to 0.
pub fn zscores(values: &[f64]) -> Vec<f64> {
    if values.len() < 2 {
        return vec![0.0; values.len()];
    }
    let m = super::mean(values);
    let s = super::sample_std(values);
    if !(s > 0.0) {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - m) / s).collect()
}
