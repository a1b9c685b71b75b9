use num_complex::Complex64;

/// Amplitudes over the `2^n` computational basis states, qubit 0 as the
/// least-significant index bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    pub amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// `|0…0⟩` on `n` qubits.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Statevector { amplitudes }
    }

    pub fn n_qubits(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &Statevector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub(crate) fn hadamard(&mut self, q: usize) {
        let bit = 1usize << q;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..self.amplitudes.len() {
            if i & bit == 0 {
                let (a, b) = (self.amplitudes[i], self.amplitudes[i | bit]);
                self.amplitudes[i] = (a + b) * h;
                self.amplitudes[i | bit] = (a - b) * h;
            }
        }
    }

    pub(crate) fn hadamard_all(&mut self) {
        for q in 0..self.n_qubits() {
            self.hadamard(q);
        }
    }

    /// Multiplies the `|1⟩` component of qubit `q` by `phase` (S: `i`, S†: `−i`).
    pub(crate) fn phase_on_one(&mut self, q: usize, phase: Complex64) {
        let bit = 1usize << q;
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & bit != 0 {
                *a *= phase;
            }
        }
    }

    /// Applies `exp(−i·angle·Z_S)` where `Z_S` is the Z-parity over `mask`.
    pub(crate) fn parity_phase(&mut self, mask: usize, angle: f64) {
        let even = Complex64::from_polar(1.0, -angle);
        let odd = even.conj();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            *a *= if (i & mask).count_ones() % 2 == 0 { even } else { odd };
        }
    }
}
