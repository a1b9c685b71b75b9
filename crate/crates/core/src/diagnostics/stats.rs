//! Welch's t-test, Cohen's d and the Student-t distribution function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt::serde_f64;

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Standard deviation with the `n − 1` denominator; 0 for fewer than two values.
pub fn sample_std(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn sample_var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}

/// Lanczos approximation (g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Lentz continued fraction for the incomplete beta function.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// CDF of Student's t with `df` degrees of freedom (real-valued `df`).
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchTest {
    #[serde(with = "serde_f64")]
    pub t: f64,
    #[serde(with = "serde_f64")]
    pub df: f64,
    pub p: f64,
}

/// Two-sided Welch test of `mean(a) = mean(b)`.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTest> {
    check_samples(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (sample_var(a) / na, sample_var(b) / nb);
    let diff = mean(a) - mean(b);
    let se2 = va + vb;
    if !(se2 > 0.0) {
        let df = na + nb - 2.0;
        return Ok(if diff == 0.0 {
            WelchTest { t: 0.0, df, p: 1.0 }
        } else {
            WelchTest {
                t: diff.signum() * f64::INFINITY,
                df,
                p: 0.0,
            }
        });
    }
    let t = diff / se2.sqrt();
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let p = (2.0 * student_t_cdf(-t.abs(), df)).clamp(0.0, 1.0);
    Ok(WelchTest { t, df, p })
}

/// Cohen's d with the pooled standard deviation. Zero pooled spread gives 0
/// for equal means and a signed infinity otherwise.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<f64> {
    check_samples(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled = (((na - 1.0) * sample_var(a) + (nb - 1.0) * sample_var(b)) / (na + nb - 2.0)).sqrt();
    let diff = mean(a) - mean(b);
    if !(pooled > 0.0) {
        return Ok(if diff == 0.0 { 0.0 } else { diff.signum() * f64::INFINITY });
    }
    Ok(diff / pooled)
}

fn check_samples(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "comparison needs at least 2 folds per side, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("comparison inputs must be finite".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectLabel {
    Negligible,
    Small,
    Medium,
    Large,
}

impl EffectLabel {
    pub fn from_d(d: f64) -> Self {
        let d = d.abs();
        if d >= 0.8 {
            EffectLabel::Large
        } else if d >= 0.5 {
            EffectLabel::Medium
        } else if d >= 0.2 {
            EffectLabel::Small
        } else {
            EffectLabel::Negligible
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EffectLabel::Negligible => "negligible",
            EffectLabel::Small => "small",
            EffectLabel::Medium => "medium",
            EffectLabel::Large => "large",
        }
    }
}

/// Statistics of `a − b` on a single per-fold metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub delta: f64,
    #[serde(with = "serde_f64")]
    pub t_statistic: f64,
    #[serde(with = "serde_f64")]
    pub df: f64,
    pub p_value: f64,
    #[serde(with = "serde_f64")]
    pub cohens_d: f64,
    pub effect_label: EffectLabel,
}

pub fn compare_models(a: &[f64], b: &[f64]) -> Result<MetricComparison> {
    let w = welch_t_test(a, b)?;
    let d = cohens_d(a, b)?;
    Ok(MetricComparison {
        delta: mean(a) - mean(b),
        t_statistic: w.t,
        df: w.df,
        p_value: w.p,
        cohens_d: d,
        effect_label: EffectLabel::from_d(d),
    })
}

/// EER-based comparison of two models, with the FPR difference alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub model_a: String,
    pub model_b: String,
    pub delta_eer: f64,
    pub delta_fpr: f64,
    #[serde(with = "serde_f64")]
    pub t_statistic: f64,
    #[serde(with = "serde_f64")]
    pub df: f64,
    pub p_value: f64,
    #[serde(with = "serde_f64")]
    pub cohens_d: f64,
    pub effect_label: EffectLabel,
}

impl ComparisonReport {
    pub fn new(model_a: &str, eer_a: &[f64], fpr_a: &[f64], model_b: &str, eer_b: &[f64], fpr_b: &[f64]) -> Result<Self> {
        let eer = compare_models(eer_a, eer_b)?;
        if fpr_a.is_empty() || fpr_b.is_empty() {
            return Err(Error::InvalidInput("empty fpr series".into()));
        }
        Ok(ComparisonReport {
            model_a: model_a.to_string(),
            model_b: model_b.to_string(),
            delta_eer: eer.delta,
            delta_fpr: mean(fpr_a) - mean(fpr_b),
            t_statistic: eer.t_statistic,
            df: eer.df,
            p_value: eer.p_value,
            cohens_d: eer.cohens_d,
            effect_label: eer.effect_label,
        })
    }
}
