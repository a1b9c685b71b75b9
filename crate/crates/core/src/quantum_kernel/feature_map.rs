use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::statevector::Statevector;
use super::MAX_QUBITS;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMapFamily {
    /// Single-qubit Z evolutions only.
    Z,
    /// Z singles plus ZZ pairs over the entanglement topology.
    Zz,
    /// Arbitrary Pauli strings.
    Pauli,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entanglement {
    /// Nearest neighbours `(0,1), (1,2), …` (contiguous windows for longer strings).
    Linear,
    /// All index sets in lexicographic order.
    Full,
}

impl FeatureMapFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureMapFamily::Z => "z",
            FeatureMapFamily::Zz => "zz",
            FeatureMapFamily::Pauli => "pauli",
        }
    }
}

impl Entanglement {
    pub fn as_str(self) -> &'static str {
        match self {
            Entanglement::Linear => "linear",
            Entanglement::Full => "full",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureMapSpec {
    pub family: FeatureMapFamily,
    pub n_qubits: usize,
    pub reps: usize,
    pub entanglement: Entanglement,
    /// Pauli labels such as `"Z"`, `"ZZ"`, `"XX"`; Pauli family only.
    #[serde(default)]
    pub pauli_strings: Vec<String>,
}

impl FeatureMapSpec {
    pub fn z(n_qubits: usize, reps: usize) -> Self {
        FeatureMapSpec {
            family: FeatureMapFamily::Z,
            n_qubits,
            reps,
            entanglement: Entanglement::Linear,
            pauli_strings: Vec::new(),
        }
    }

    pub fn zz(n_qubits: usize, reps: usize, entanglement: Entanglement) -> Self {
        FeatureMapSpec {
            family: FeatureMapFamily::Zz,
            n_qubits,
            reps,
            entanglement,
            pauli_strings: Vec::new(),
        }
    }

    pub fn pauli(n_qubits: usize, reps: usize, entanglement: Entanglement, strings: &[&str]) -> Result<Self> {
        let spec = FeatureMapSpec {
            family: FeatureMapFamily::Pauli,
            n_qubits,
            reps,
            entanglement,
            pauli_strings: strings.iter().map(|s| s.to_string()).collect(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(Error::InvalidConfig(format!(
                "feature map needs 1..={MAX_QUBITS} qubits, got {}",
                self.n_qubits
            )));
        }
        if self.reps == 0 {
            return Err(Error::InvalidConfig("feature map reps must be >= 1".into()));
        }
        match self.family {
            FeatureMapFamily::Pauli if self.pauli_strings.is_empty() => Err(Error::InvalidConfig(
                "Pauli feature map needs at least one Pauli string".into(),
            )),
            FeatureMapFamily::Z | FeatureMapFamily::Zz if !self.pauli_strings.is_empty() => Err(
                Error::InvalidConfig("pauli_strings only apply to the Pauli family".into()),
            ),
            _ => {
                for s in &self.pauli_strings {
                    parse_label(s)?;
                    if s.len() > self.n_qubits {
                        return Err(Error::InvalidConfig(format!(
                            "Pauli string {s:?} is longer than {} qubits",
                            self.n_qubits
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Pauli labels applied per repetition, in order.
    pub fn labels(&self) -> Vec<String> {
        match self.family {
            FeatureMapFamily::Z => vec!["Z".into()],
            FeatureMapFamily::Zz => vec!["Z".into(), "ZZ".into()],
            FeatureMapFamily::Pauli => self.pauli_strings.clone(),
        }
    }

    pub fn canonical(&self) -> String {
        format!(
            "family={};n_qubits={};reps={};entanglement={};paulis={}",
            self.family.as_str(),
            self.n_qubits,
            self.reps,
            self.entanglement.as_str(),
            self.labels().join("|")
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

fn parse_label(s: &str) -> Result<Vec<Pauli>> {
    if s.is_empty() {
        return Err(Error::UnsupportedPauli(s.to_string()));
    }
    s.chars()
        .map(|c| match c {
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            _ => Err(Error::UnsupportedPauli(s.to_string())),
        })
        .collect()
}

/// One evolution `exp(−i·φ_S(z)·P_S)`; `ops[k]` acts on `qubits[k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliTerm {
    pub qubits: Vec<usize>,
    pub ops: Vec<Pauli>,
}

impl PauliTerm {
    pub fn angle(&self, z: &[f64]) -> f64 {
        match self.qubits.as_slice() {
            [q] => z[*q],
            qs => qs.iter().map(|&q| PI - z[q]).product(),
        }
    }

    fn mask(&self) -> usize {
        self.qubits.iter().fold(0, |m, &q| m | (1 << q))
    }

    fn is_diagonal(&self) -> bool {
        self.ops.iter().all(|&p| p == Pauli::Z)
    }
}

fn index_sets(n: usize, k: usize, ent: Entanglement) -> Vec<Vec<usize>> {
    if k == 1 {
        return (0..n).map(|q| vec![q]).collect();
    }
    if k > n {
        return Vec::new();
    }
    match ent {
        Entanglement::Linear => (0..=n - k).map(|s| (s..s + k).collect()).collect(),
        Entanglement::Full => {
            let mut out = Vec::new();
            let mut cur = Vec::with_capacity(k);
            combinations(0, n, k, &mut cur, &mut out);
            out
        }
    }
}

fn combinations(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for q in start..n {
        cur.push(q);
        combinations(q + 1, n, k, cur, out);
        cur.pop();
    }
}

/// A validated feature map with its term list expanded once.
#[derive(Debug, Clone)]
pub struct CompiledFeatureMap {
    spec: FeatureMapSpec,
    terms: Vec<PauliTerm>,
}

impl CompiledFeatureMap {
    pub fn new(spec: &FeatureMapSpec) -> Result<Self> {
        spec.validate()?;
        let mut terms = Vec::new();
        for label in spec.labels() {
            let ops = parse_label(&label)?;
            for qubits in index_sets(spec.n_qubits, ops.len(), spec.entanglement) {
                terms.push(PauliTerm {
                    qubits,
                    ops: ops.clone(),
                });
            }
        }
        Ok(CompiledFeatureMap {
            spec: spec.clone(),
            terms,
        })
    }

    pub fn spec(&self) -> &FeatureMapSpec {
        &self.spec
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// True when every term is a Z product, so each repetition's phase block
    /// is a single diagonal.
    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(PauliTerm::is_diagonal)
    }

    fn check_input(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.spec.n_qubits {
            return Err(Error::DimensionMismatch {
                context: "feature map input",
                expected: self.spec.n_qubits,
                got: z.len(),
            });
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("feature map input is not finite".into()));
        }
        Ok(())
    }

    pub fn encode(&self, z: &[f64]) -> Result<Statevector> {
        if self.is_diagonal() {
            self.encode_diagonal(z)
        } else {
            self.encode_generic(z)
        }
    }

    /// Gate-by-gate evolution; valid for every family.
    pub fn encode_generic(&self, z: &[f64]) -> Result<Statevector> {
        self.check_input(z)?;
        let minus_i = Complex64::new(0.0, -1.0);
        let plus_i = Complex64::new(0.0, 1.0);
        let mut psi = Statevector::zero(self.spec.n_qubits);
        for _ in 0..self.spec.reps {
            psi.hadamard_all();
            for term in &self.terms {
                for (&q, &op) in term.qubits.iter().zip(&term.ops) {
                    match op {
                        Pauli::X => psi.hadamard(q),
                        Pauli::Y => {
                            psi.phase_on_one(q, minus_i);
                            psi.hadamard(q);
                        }
                        Pauli::Z => {}
                    }
                }
                psi.parity_phase(term.mask(), term.angle(z));
                for (&q, &op) in term.qubits.iter().zip(&term.ops) {
                    match op {
                        Pauli::X => psi.hadamard(q),
                        Pauli::Y => {
                            psi.hadamard(q);
                            psi.phase_on_one(q, plus_i);
                        }
                        Pauli::Z => {}
                    }
                }
            }
        }
        Ok(psi)
    }

    /// Fast path for Z-only maps: all phases of a repetition are summed into
    /// one diagonal `θ(b) = Σ_S φ_S·(−1)^{|b ∧ S|}` applied after each
    /// Hadamard layer.
    pub fn encode_diagonal(&self, z: &[f64]) -> Result<Statevector> {
        if !self.is_diagonal() {
            return Err(Error::InvalidInput(
                "diagonal evaluation requires a Z-only feature map".into(),
            ));
        }
        self.check_input(z)?;
        let dim = 1usize << self.spec.n_qubits;
        let mut theta = vec![0.0; dim];
        for term in &self.terms {
            let (mask, angle) = (term.mask(), term.angle(z));
            for (b, t) in theta.iter_mut().enumerate() {
                if (b & mask).count_ones() % 2 == 0 {
                    *t += angle;
                } else {
                    *t -= angle;
                }
            }
        }
        let phases: Vec<Complex64> = theta.iter().map(|&t| Complex64::from_polar(1.0, -t)).collect();
        let mut psi = Statevector::zero(self.spec.n_qubits);
        for _ in 0..self.spec.reps {
            psi.hadamard_all();
            for (a, p) in psi.amplitudes.iter_mut().zip(&phases) {
                *a *= p;
            }
        }
        Ok(psi)
    }
}
