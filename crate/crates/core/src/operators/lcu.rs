use num_complex::Complex64;

use super::pauli::{PauliSum, PauliTerm, Phase, DROP_TOLERANCE};
use crate::error::{Error, Result};

/// A hermitian operator written as `Σ α_k P_k` with every `α_k > 0`.
///
/// Signs are carried by the phase of `P_k`. `lambda` is `Σ α_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LcuOperator {
    n_qubits: usize,
    terms: Vec<(f64, PauliTerm)>,
    lambda: f64,
}

impl LcuOperator {
    /// Canonicalizes a hermitian Pauli sum. Coefficients below `1e-12` are
    /// dropped and negative ones become `+|c|` with a `-1` phase.
    pub fn from_pauli_sum(sum: &PauliSum) -> Result<Self> {
        let scale = sum.one_norm().max(1.0);
        let err = sum.hermiticity_error();
        if err > 1e-10 * scale {
            return Err(Error::NotHermitian(err));
        }
        let mut terms = Vec::with_capacity(sum.len());
        for (c, t) in sum.terms() {
            let a = c.re;
            if a.abs() < DROP_TOLERANCE {
                continue;
            }
            let phase = if a < 0.0 {
                Phase::MINUS_ONE
            } else {
                Phase::ONE
            };
            terms.push((a.abs(), t.with_phase(phase)));
        }
        let lambda = terms.iter().map(|(a, _)| a).sum();
        Ok(LcuOperator {
            n_qubits: sum.n_qubits(),
            terms,
            lambda,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliTerm)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Removes the identity component, returning it as a signed scalar shift.
    pub fn split_identity(&self) -> (LcuOperator, f64) {
        let mut shift = 0.0;
        let mut terms = Vec::with_capacity(self.terms.len());
        for &(a, t) in &self.terms {
            if t.is_identity() {
                shift += a * t.phase().to_complex().re;
            } else {
                terms.push((a, t));
            }
        }
        let lambda = terms.iter().map(|(a, _)| a).sum();
        (
            LcuOperator {
                n_qubits: self.n_qubits,
                terms,
                lambda,
            },
            shift,
        )
    }

    /// Signed real coefficient of each string, in term order.
    pub fn signed_coefficients(&self) -> impl Iterator<Item = f64> + '_ {
        self.terms
            .iter()
            .map(|(a, t)| a * t.phase().to_complex().re)
    }

    /// `dλ/dθ` for a family `Ĥ(θ)` whose derivative is `v`.
    ///
    /// Strings absent from this operator do not contribute: `|c|` has no
    /// derivative at `c = 0`.
    pub fn lambda_derivative(&self, v: &PauliSum) -> f64 {
        self.terms
            .iter()
            .map(|(_, t)| {
                let sign = t.phase().to_complex().re;
                sign * v.coefficient(&t.with_phase(Phase::ONE)).re
            })
            .sum()
    }

    pub fn to_pauli_sum(&self) -> PauliSum {
        let mut s = PauliSum::new(self.n_qubits);
        for (a, t) in &self.terms {
            s.add_term(Complex64::new(*a, 0.0), t);
        }
        s
    }
}
