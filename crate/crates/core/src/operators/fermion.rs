use std::collections::BTreeMap;

use num_complex::Complex64;

use super::pauli::{PauliSum, PauliTerm, Phase, DROP_TOLERANCE};
use crate::error::{Error, Result};

/// A creation (`dagger`) or annihilation operator on one mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Ladder { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Ladder {
            mode,
            dagger: false,
        }
    }
}

/// Sum of products of ladder operators with complex coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FermionOperator {
    terms: Vec<(Complex64, Vec<Ladder>)>,
}

impl FermionOperator {
    pub fn zero() -> Self {
        FermionOperator::default()
    }

    pub fn scalar(c: Complex64) -> Self {
        FermionOperator {
            terms: vec![(c, Vec::new())],
        }
    }

    pub fn term(c: Complex64, word: Vec<Ladder>) -> Self {
        FermionOperator {
            terms: vec![(c, word)],
        }
    }

    /// `Ê_pq = a†_p a_q`.
    pub fn excitation(p: usize, q: usize) -> Self {
        Self::term(
            Complex64::new(1.0, 0.0),
            vec![Ladder::create(p), Ladder::annihilate(q)],
        )
    }

    /// `Ê_pq Ê_rs`.
    pub fn double_excitation(p: usize, q: usize, r: usize, s: usize) -> Self {
        Self::term(
            Complex64::new(1.0, 0.0),
            vec![
                Ladder::create(p),
                Ladder::annihilate(q),
                Ladder::create(r),
                Ladder::annihilate(s),
            ],
        )
    }

    pub fn terms(&self) -> &[(Complex64, Vec<Ladder>)] {
        &self.terms
    }

    pub fn n_modes(&self) -> usize {
        self.terms
            .iter()
            .flat_map(|(_, w)| w.iter().map(|l| l.mode + 1))
            .max()
            .unwrap_or(0)
    }

    pub fn add(mut self, other: &FermionOperator) -> Self {
        self.terms.extend(other.terms.iter().cloned());
        self
    }

    pub fn scale(mut self, factor: Complex64) -> Self {
        for (c, _) in &mut self.terms {
            *c *= factor;
        }
        self
    }

    pub fn mul(&self, other: &FermionOperator) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ca, wa) in &self.terms {
            for (cb, wb) in &other.terms {
                let mut w = wa.clone();
                w.extend_from_slice(wb);
                terms.push((ca * cb, w));
            }
        }
        FermionOperator { terms }
    }

    pub fn adjoint(&self) -> Self {
        FermionOperator {
            terms: self
                .terms
                .iter()
                .map(|(c, w)| {
                    let w = w
                        .iter()
                        .rev()
                        .map(|l| Ladder {
                            mode: l.mode,
                            dagger: !l.dagger,
                        })
                        .collect();
                    (c.conj(), w)
                })
                .collect(),
        }
    }

    /// Canonical normal order: creators first, each group by descending mode.
    pub fn normal_ordered(&self) -> Self {
        let mut done: BTreeMap<Vec<Ladder>, Complex64> = BTreeMap::new();
        let mut stack: Vec<(Complex64, Vec<Ladder>)> = self.terms.clone();
        while let Some((c, mut w)) = stack.pop() {
            let mut zero = false;
            let mut sign = 1.0;
            // insertion sort with anticommutation
            let mut i = 1;
            while i < w.len() {
                let mut j = i;
                while j > 0 {
                    let (a, b) = (w[j - 1], w[j]);
                    let out_of_order = match (a.dagger, b.dagger) {
                        (false, true) => true,
                        (true, true) | (false, false) => a.mode < b.mode,
                        (true, false) => false,
                    };
                    if a.dagger == b.dagger && a.mode == b.mode {
                        zero = true;
                        break;
                    }
                    if !out_of_order {
                        break;
                    }
                    if !a.dagger && b.dagger && a.mode == b.mode {
                        // a_p a†_p = 1 - a†_p a_p
                        let mut contracted = w.clone();
                        contracted.drain(j - 1..=j);
                        stack.push((c * sign, contracted));
                    }
                    w.swap(j - 1, j);
                    sign = -sign;
                    j -= 1;
                }
                if zero {
                    break;
                }
                i += 1;
            }
            if !zero {
                *done.entry(w).or_default() += c * sign;
            }
        }
        FermionOperator {
            terms: done
                .into_iter()
                .filter(|(_, c)| c.norm() >= DROP_TOLERANCE)
                .map(|(w, c)| (c, w))
                .collect(),
        }
    }
}

fn ladder_image(l: Ladder, n_qubits: usize) -> PauliSum {
    // a_p = Z_0…Z_{p-1} (X_p + iY_p)/2, a†_p = Z_0…Z_{p-1} (X_p − iY_p)/2
    let bit = 1u64 << l.mode;
    let string = (1u64 << l.mode) - 1;
    let x = PauliTerm::new(n_qubits, bit, string, Phase::ONE).expect("mode checked");
    let y = PauliTerm::new(n_qubits, bit, string | bit, Phase::ONE).expect("mode checked");
    let mut s = PauliSum::new(n_qubits);
    s.add_term(Complex64::new(0.5, 0.0), &x);
    let iy = if l.dagger { -0.5 } else { 0.5 };
    s.add_term(Complex64::new(0.0, iy), &y);
    s
}

/// Jordan–Wigner image with the occupied mode mapped to `|1⟩`.
pub fn jordan_wigner(op: &FermionOperator, n_qubits: usize) -> Result<PauliSum> {
    if let Some(bad) = op
        .terms
        .iter()
        .flat_map(|(_, w)| w.iter())
        .find(|l| l.mode >= n_qubits)
    {
        return Err(Error::ModeOutOfRange {
            index: bad.mode,
            n_modes: n_qubits,
        });
    }
    let images: Vec<[PauliSum; 2]> = (0..n_qubits)
        .map(|p| {
            [
                ladder_image(Ladder::annihilate(p), n_qubits),
                ladder_image(Ladder::create(p), n_qubits),
            ]
        })
        .collect();
    let mut total = PauliSum::new(n_qubits);
    for (c, word) in &op.terms {
        let mut acc = PauliSum::identity(n_qubits, 1.0);
        for l in word {
            acc = acc.mul(&images[l.mode][l.dagger as usize])?;
        }
        total = total.add(&acc.scale(*c))?;
    }
    Ok(total.simplify(DROP_TOLERANCE))
}
