//! Exact statevector simulation of Pauli-evolution feature maps and the
//! fidelity kernel `k(z, z') = |⟨ψ(z)|ψ(z')⟩|²`.
//!
//! Circuit convention, per repetition: a Hadamard on every qubit, then for
//! each Pauli term `P_S` on index set `S` the evolution `exp(−i·φ_S(z)·P_S)`
//! with `φ_{i}(z) = z_i` and `φ_S(z) = ∏_{k∈S} (π − z_k)` for `|S| ≥ 2`.
//! X and Y factors are realised by basis changes around the Z-parity phase
//! (H for X, S†·H for Y). Qubit 0 is the least-significant bit of a basis
//! index. Global phase is never observable through the kernel.

mod feature_map;
mod statevector;

pub use feature_map::{CompiledFeatureMap, Entanglement, FeatureMapFamily, FeatureMapSpec, Pauli, PauliTerm};
pub use statevector::Statevector;

use crate::error::Result;

/// Maximum register width accepted by the simulator.
pub const MAX_QUBITS: usize = 20;

/// Prepares `U_φ(z)|0…0⟩`.
pub fn encode_state(z: &[f64], spec: &FeatureMapSpec) -> Result<Statevector> {
    CompiledFeatureMap::new(spec)?.encode(z)
}

/// `|⟨ψ(z1)|ψ(z2)⟩|²`, clamped to `[0, 1]`.
///
/// Arguments are put in a canonical order before simulation so the result is
/// exactly symmetric.
pub fn fidelity_kernel(z1: &[f64], z2: &[f64], spec: &FeatureMapSpec) -> Result<f64> {
    let map = CompiledFeatureMap::new(spec)?;
    let (a, b) = canonical_pair(z1, z2);
    Ok(state_fidelity(&map.encode(a)?, &map.encode(b)?))
}

/// Fidelity between two prepared states, clamped against round-off.
pub fn state_fidelity(a: &Statevector, b: &Statevector) -> f64 {
    a.overlap(b).norm_sqr().clamp(0.0, 1.0)
}

pub(crate) fn canonical_pair<'a>(z1: &'a [f64], z2: &'a [f64]) -> (&'a [f64], &'a [f64]) {
    let ord = z1
        .iter()
        .zip(z2)
        .map(|(a, b)| a.total_cmp(b))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal);
    if ord.is_gt() {
        (z2, z1)
    } else {
        (z1, z2)
    }
}
