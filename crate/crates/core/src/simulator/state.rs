use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::{PauliSum, PauliTerm};

/// Default cap on `n_system + n_ancilla`.
pub const DEFAULT_MAX_QUBITS: usize = 22;

/// Active qubit cap, overridable through `KRYLOVGRAD_MAX_QUBITS`.
pub fn max_qubits() -> usize {
    std::env::var("KRYLOVGRAD_MAX_QUBITS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_QUBITS)
}

pub(crate) fn check_cap(n_qubits: usize) -> Result<()> {
    let cap = max_qubits();
    if n_qubits > cap {
        return Err(Error::QubitCap {
            requested: n_qubits,
            cap,
        });
    }
    Ok(())
}

pub(crate) fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub(crate) fn norm_sqr(u: &[Complex64]) -> f64 {
    u.iter().map(|a| a.norm_sqr()).sum()
}

/// Dense amplitudes over a system register and an ancilla register.
///
/// Layout is ancilla-major: amplitude index `(a << n_system) | s` holds
/// ancilla basis state `a` and system basis state `s`, so each ancilla value
/// owns a contiguous system block. Within a register qubit `q` is bit `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_system: usize,
    n_ancilla: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n_system: usize, n_ancilla: usize) -> Result<Self> {
        Self::basis(n_system, n_ancilla, 0)
    }

    pub fn basis(n_system: usize, n_ancilla: usize, index: usize) -> Result<Self> {
        check_cap(n_system + n_ancilla)?;
        let len = 1usize << (n_system + n_ancilla);
        if index >= len {
            return Err(Error::Invalid(format!("basis index {index} out of range")));
        }
        let mut amplitudes = vec![Complex64::default(); len];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            n_system,
            n_ancilla,
            amplitudes,
        })
    }

    pub fn from_amplitudes(
        n_system: usize,
        n_ancilla: usize,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        check_cap(n_system + n_ancilla)?;
        if amplitudes.len() != 1usize << (n_system + n_ancilla) {
            return Err(Error::Invalid(format!(
                "{} amplitudes do not fit {} qubits",
                amplitudes.len(),
                n_system + n_ancilla
            )));
        }
        Ok(StateVector {
            n_system,
            n_ancilla,
            amplitudes,
        })
    }

    /// A system-only state.
    pub fn system(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = amplitudes.len().trailing_zeros() as usize;
        if !amplitudes.len().is_power_of_two() {
            return Err(Error::Invalid("length is not a power of two".into()));
        }
        Self::from_amplitudes(n, 0, amplitudes)
    }

    pub fn n_system(&self) -> usize {
        self.n_system
    }

    pub fn n_ancilla(&self) -> usize {
        self.n_ancilla
    }

    pub fn n_qubits(&self) -> usize {
        self.n_system + self.n_ancilla
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    /// System amplitudes paired with ancilla basis state `a`.
    pub fn block(&self, a: usize) -> &[Complex64] {
        let d = 1 << self.n_system;
        &self.amplitudes[a * d..(a + 1) * d]
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amplitudes).sqrt()
    }

    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        for a in &mut self.amplitudes {
            *a /= n;
        }
        Ok(n)
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(Error::QubitMismatch(self.n_qubits(), other.n_qubits()));
        }
        Ok(dot(&self.amplitudes, &other.amplitudes))
    }

    /// Chooses the register an operator acts on: the system register, or the
    /// whole register when the qubit counts match it.
    fn chunk_len(&self, n_qubits: usize) -> Result<usize> {
        if n_qubits == self.n_system {
            Ok(1 << self.n_system)
        } else if n_qubits == self.n_qubits() {
            Ok(self.amplitudes.len())
        } else {
            Err(Error::QubitMismatch(n_qubits, self.n_system))
        }
    }

    /// Returns `op|self⟩`, generally unnormalized.
    pub fn apply_pauli_sum(&self, op: &PauliSum) -> Result<StateVector> {
        let chunk = self.chunk_len(op.n_qubits())?;
        let mut out = vec![Complex64::default(); self.amplitudes.len()];
        for (src, dst) in self.amplitudes.chunks(chunk).zip(out.chunks_mut(chunk)) {
            op.apply_into(src, dst);
        }
        Ok(StateVector {
            amplitudes: out,
            ..*self
        })
    }

    fn raw_expectation(&self, term: &PauliTerm) -> Result<Complex64> {
        let chunk = self.chunk_len(term.n_qubits())?;
        Ok(self
            .amplitudes
            .chunks(chunk)
            .map(|c| term.matrix_element(c, c))
            .sum())
    }

    /// `⟨ψ|O|ψ⟩ / ⟨ψ|ψ⟩` for a hermitian observable.
    pub fn expectation(&self, observable: &PauliSum) -> Result<f64> {
        let err = observable.hermiticity_error();
        if err > 1e-12 * observable.one_norm().max(1.0) {
            return Err(Error::NotHermitian(err));
        }
        let n2 = norm_sqr(&self.amplitudes);
        if n2 == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let mut acc = Complex64::default();
        for (c, t) in observable.terms() {
            acc += c * self.raw_expectation(&t)?;
        }
        Ok(acc.re / n2)
    }

    /// Single-shot variance `1 − ⟨P⟩²` of measuring a real-phase Pauli string.
    pub fn pauli_variance(&self, p: &PauliTerm) -> Result<f64> {
        if !p.phase().is_real() {
            return Err(Error::Invalid(format!("{p} has an imaginary phase")));
        }
        let n2 = norm_sqr(&self.amplitudes);
        if n2 == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let m = self.raw_expectation(p)?.re / n2;
        Ok(1.0 - m * m)
    }

    /// Little-endian interleaved `(re, im)` doubles, for debugging dumps.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 * self.amplitudes.len());
        for a in &self.amplitudes {
            out.extend_from_slice(&a.re.to_le_bytes());
            out.extend_from_slice(&a.im.to_le_bytes());
        }
        out
    }

    pub fn from_le_bytes(n_system: usize, n_ancilla: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() % 16 != 0 {
            return Err(Error::Invalid("byte length is not a multiple of 16".into()));
        }
        let amps = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
        Self::from_amplitudes(n_system, n_ancilla, amps)
    }
}
