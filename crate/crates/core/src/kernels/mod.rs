//! Classical and quantum kernels, blockwise Gram assembly, the on-disk Gram
//! cache and PSD validation.

mod cache;
mod gram;
mod psd;

pub use cache::{read_gram_file, write_gram_file, CacheEntry, GramCache, GramFileHeader, GRAM_FORMAT_VERSION, GRAM_MAGIC};
pub use gram::{build_gram, cross_gram, rowset_digest, GramMatrix};
pub use psd::{min_eigenvalue, psd_floor, PsdReport, DEFAULT_PSD_TOL};

use serde::{Deserialize, Serialize};

use crate::digest::{Digest, Hasher};
use crate::error::{Error, Result};
use crate::quantum_kernel::{fidelity_kernel, FeatureMapSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear,
    Rbf { gamma: f64 },
    Polynomial { degree: u32, coef0: f64 },
    Quantum { feature_map: FeatureMapSpec },
}

/// Whether a kernel is evaluated classically or through the simulated circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Classical,
    Quantum,
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Rbf { gamma } if !(gamma.is_finite() && *gamma > 0.0) => {
                Err(Error::InvalidConfig(format!("rbf gamma must be positive, got {gamma}")))
            }
            KernelSpec::Polynomial { degree, coef0 } if *degree == 0 || !coef0.is_finite() => Err(
                Error::InvalidConfig(format!("polynomial kernel needs degree >= 1 and finite coef0, got {degree}, {coef0}")),
            ),
            KernelSpec::Quantum { feature_map } => feature_map.validate(),
            _ => Ok(()),
        }
    }

    pub fn family(&self) -> KernelFamily {
        match self {
            KernelSpec::Quantum { .. } => KernelFamily::Quantum,
            _ => KernelFamily::Classical,
        }
    }

    /// Kernels with `k(z, z) = 1` for every `z`.
    pub fn has_unit_diagonal(&self) -> bool {
        matches!(self, KernelSpec::Rbf { .. } | KernelSpec::Quantum { .. })
    }

    pub fn canonical(&self) -> String {
        match self {
            KernelSpec::Linear => "linear".into(),
            KernelSpec::Rbf { gamma } => format!("rbf;gamma={gamma}"),
            KernelSpec::Polynomial { degree, coef0 } => format!("polynomial;degree={degree};coef0={coef0}"),
            KernelSpec::Quantum { feature_map } => format!("quantum;{}", feature_map.canonical()),
        }
    }

    pub fn digest(&self) -> Digest {
        let mut h = Hasher::new();
        h.str("kernel").str(&self.canonical());
        h.finish()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn eval_classical(z1: &[f64], z2: &[f64], spec: &KernelSpec) -> f64 {
    match spec {
        KernelSpec::Linear => dot(z1, z2),
        KernelSpec::Rbf { gamma } => {
            let d2: f64 = z1.iter().zip(z2).map(|(a, b)| (a - b) * (a - b)).sum();
            (-gamma * d2).exp()
        }
        KernelSpec::Polynomial { degree, coef0 } => (dot(z1, z2) + coef0).powi(*degree as i32),
        KernelSpec::Quantum { .. } => unreachable!("quantum kernels are evaluated on prepared states"),
    }
}

/// Evaluates one kernel entry.
pub fn eval_kernel(z1: &[f64], z2: &[f64], spec: &KernelSpec) -> Result<f64> {
    if z1.len() != z2.len() {
        return Err(Error::DimensionMismatch {
            context: "eval_kernel",
            expected: z1.len(),
            got: z2.len(),
        });
    }
    match spec {
        KernelSpec::Quantum { feature_map } => fidelity_kernel(z1, z2, feature_map),
        classical => Ok(eval_classical(z1, z2, classical)),
    }
}
