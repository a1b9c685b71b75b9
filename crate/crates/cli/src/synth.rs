//! Synthetic two-class data injected directly at the post-PCA stage.

use ndarray::Array2;
use qkswap_core::digest::{Digest, Hasher};
use qkswap_core::evaluation::FeatureSet;
use qkswap_core::{Error, Label, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::artifact::FeatureArtifact;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub n_per_class: usize,
    /// Distance between the class means in units of the per-axis σ.
    pub separation: f64,
    pub seed: u64,
    pub dim: usize,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_per_class < 2 {
            return Err(Error::InvalidConfig(format!("n_per_class must be >= 2, got {}", self.n_per_class)));
        }
        if !(self.separation.is_finite() && self.separation >= 0.0) {
            return Err(Error::InvalidConfig(format!("separation must be finite and >= 0, got {}", self.separation)));
        }
        if self.dim == 0 {
            return Err(Error::InvalidConfig("dim must be >= 1".into()));
        }
        Ok(())
    }

    pub fn digest(&self) -> Digest {
        let mut h = Hasher::new();
        h.str("synth")
            .u64(self.n_per_class as u64)
            .f64s([self.separation])
            .u64(self.seed)
            .u64(self.dim as u64);
        h.finish()
    }
}

/// Unit-variance isotropic Gaussians centred at `∓separation/2` on the first
/// axis; bona fide rows first, then spoof.
pub fn generate(spec: &SynthSpec) -> Result<FeatureArtifact> {
    spec.validate()?;
    let n = 2 * spec.n_per_class;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut x = Array2::zeros((n, spec.dim));
    let mut ids = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = if i < spec.n_per_class { Label::Bonafide } else { Label::Spoof };
        let offset = match label {
            Label::Bonafide => -spec.separation / 2.0,
            Label::Spoof => spec.separation / 2.0,
        };
        for j in 0..spec.dim {
            let z: f64 = StandardNormal.sample(&mut rng);
            x[(i, j)] = if j == 0 { z + offset } else { z };
        }
        ids.push(format!("{}_{:05}", label.as_str(), i % spec.n_per_class));
        labels.push(label);
    }
    let digest = spec.digest();
    Ok(FeatureArtifact {
        input_digest: digest,
        params_digest: digest,
        set: FeatureSet::new(ids, labels, x)?,
    })
}

/// `id,label` lines describing the generated rows.
pub fn manifest(set: &FeatureSet) -> String {
    let mut out = String::from("# id,label\n");
    for (id, label) in set.ids.iter().zip(&set.labels) {
        out.push_str(&format!("{id},{label}\n"));
    }
    out
}
