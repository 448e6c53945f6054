use std::collections::BTreeMap;
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients below this magnitude are dropped on canonicalization.
pub const DROP_TOLERANCE: f64 = 1e-12;

/// A power of the imaginary unit, `i^k` with `k` in `0..4`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: i64) -> Self {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn conj(self) -> Self {
        Phase((4 - self.0) % 4)
    }

    pub fn to_complex(self) -> Complex64 {
        i_pow(self.0 as u32)
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

pub(crate) fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// A phased Pauli string `i^k ⊗_q σ_q`.
///
/// Qubit `q` is bit `q` of both masks and of basis-state indices. The letter on
/// qubit `q` is X for `(x,z) = (1,0)`, Z for `(0,1)` and Y for `(1,1)`, so the
/// letters themselves are always hermitian and all phase lives in `phase`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliTerm {
    n_qubits: usize,
    x: u64,
    z: u64,
    phase: Phase,
}

impl PauliTerm {
    pub fn new(n_qubits: usize, x_mask: u64, z_mask: u64, phase: Phase) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 64 {
            return Err(Error::Invalid(format!(
                "unsupported qubit count {n_qubits}"
            )));
        }
        let valid = if n_qubits == 64 {
            u64::MAX
        } else {
            (1u64 << n_qubits) - 1
        };
        if (x_mask | z_mask) & !valid != 0 {
            return Err(Error::Invalid(format!(
                "mask bits set beyond qubit {}",
                n_qubits - 1
            )));
        }
        Ok(PauliTerm {
            n_qubits,
            x: x_mask,
            z: z_mask,
            phase,
        })
    }

    pub fn identity(n_qubits: usize) -> Self {
        PauliTerm {
            n_qubits,
            x: 0,
            z: 0,
            phase: Phase::ONE,
        }
    }

    /// A single letter (`'X'`, `'Y'` or `'Z'`) on `qubit`.
    pub fn single(n_qubits: usize, qubit: usize, letter: char) -> Result<Self> {
        if qubit >= n_qubits {
            return Err(Error::Invalid(format!("qubit {qubit} out of range")));
        }
        let bit = 1u64 << qubit;
        let (x, z) = match letter.to_ascii_uppercase() {
            'X' => (bit, 0),
            'Y' => (bit, bit),
            'Z' => (0, bit),
            'I' => (0, 0),
            other => return Err(Error::Invalid(format!("unknown Pauli letter {other:?}"))),
        };
        PauliTerm::new(n_qubits, x, z, Phase::ONE)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn product(&self, other: &PauliTerm) -> Result<PauliTerm> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        Ok(self.product_unchecked(other))
    }

    pub(crate) fn product_unchecked(&self, other: &PauliTerm) -> PauliTerm {
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        // σ(x,z) = i^{|x∧z|} X^x Z^z and Z^z1 X^x2 = (-1)^{|z1∧x2|} X^x2 Z^z1
        let k = self.phase.0 as i64
            + other.phase.0 as i64
            + (self.x & self.z).count_ones() as i64
            + (other.x & other.z).count_ones() as i64
            + 2 * (self.z & other.x).count_ones() as i64
            - (x & z).count_ones() as i64;
        PauliTerm {
            n_qubits: self.n_qubits,
            x,
            z,
            phase: Phase::from_exponent(k),
        }
    }

    pub fn commutes_with(&self, other: &PauliTerm) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    pub fn adjoint(&self) -> PauliTerm {
        PauliTerm {
            phase: self.phase.conj(),
            ..*self
        }
    }

    /// Image of the basis state `|b⟩`: returns `(b', c)` with `P|b⟩ = c|b'⟩`.
    pub fn apply_to_basis(&self, b: u64) -> (u64, Complex64) {
        let k =
            self.phase.0 as u32 + (self.x & self.z).count_ones() + 2 * (self.z & b).count_ones();
        (b ^ self.x, i_pow(k))
    }

    /// `output += coeff · P · input` over a register of `n_qubits` qubits.
    pub fn apply_into(&self, coeff: Complex64, input: &[Complex64], output: &mut [Complex64]) {
        debug_assert_eq!(input.len(), output.len());
        let base = coeff * i_pow(self.phase.0 as u32 + (self.x & self.z).count_ones());
        let x = self.x as usize;
        let z = self.z as usize;
        for (b, &amp) in input.iter().enumerate() {
            let c = if (z & b).count_ones() & 1 == 1 {
                -base
            } else {
                base
            };
            output[b ^ x] += c * amp;
        }
    }

    /// `⟨u|P|v⟩` for vectors on the full register.
    pub fn matrix_element(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let base = i_pow(self.phase.0 as u32 + (self.x & self.z).count_ones());
        let x = self.x as usize;
        let z = self.z as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, &amp) in v.iter().enumerate() {
            let t = u[b ^ x].conj() * amp;
            if (z & b).count_ones() & 1 == 1 {
                acc -= t;
            } else {
                acc += t;
            }
        }
        acc * base
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for b in 0..dim {
            let (row, c) = self.apply_to_basis(b as u64);
            m[(row as usize, b)] = c;
        }
        m
    }

    /// The letters, qubit 0 first.
    pub fn letters(&self) -> String {
        (0..self.n_qubits)
            .map(|q| match ((self.x >> q) & 1, (self.z >> q) & 1) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (1, 1) => 'Y',
                _ => 'Z',
            })
            .collect()
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["", "i", "-", "-i"][self.phase.0 as usize];
        write!(f, "{prefix}{}", self.letters())
    }
}

/// Parses strings such as `XIZ`, `-iYY` (qubit 0 first).
impl FromStr for PauliTerm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, rest) = if let Some(r) = s.strip_prefix("-i") {
            (Phase::MINUS_I, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (Phase::I, r)
        } else {
            (Phase::ONE, s.strip_prefix('+').unwrap_or(s))
        };
        let n = rest.chars().count();
        let mut term = PauliTerm::identity(n.max(1));
        if n == 0 {
            return Err(Error::Invalid("empty Pauli string".into()));
        }
        for (q, c) in rest.chars().enumerate() {
            let letter = PauliTerm::single(n, q, c)?;
            term.x |= letter.x;
            term.z |= letter.z;
        }
        term.n_qubits = n;
        Ok(term.with_phase(phase))
    }
}

/// A complex linear combination of Pauli strings in canonical form.
///
/// Each string is keyed by its masks with the phase folded into the
/// coefficient, so duplicates are merged on insertion.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<(u64, u64), Complex64>,
}

impl PauliSum {
    pub fn new(n_qubits: usize) -> Self {
        PauliSum {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_qubits: usize, coeff: f64) -> Self {
        let mut s = PauliSum::new(n_qubits);
        s.add_term(Complex64::new(coeff, 0.0), &PauliTerm::identity(n_qubits));
        s
    }

    pub fn from_terms<'a>(
        n_qubits: usize,
        terms: impl IntoIterator<Item = (Complex64, &'a PauliTerm)>,
    ) -> Result<Self> {
        let mut s = PauliSum::new(n_qubits);
        for (c, t) in terms {
            if t.n_qubits != n_qubits {
                return Err(Error::QubitMismatch(n_qubits, t.n_qubits));
            }
            s.add_term(c, t);
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `coeff · term`; the caller guarantees matching qubit counts.
    pub fn add_term(&mut self, coeff: Complex64, term: &PauliTerm) {
        debug_assert_eq!(term.n_qubits, self.n_qubits);
        let c = coeff * term.phase.to_complex();
        *self.terms.entry((term.x, term.z)).or_default() += c;
    }

    /// Terms in canonical order, each string carrying phase `+1`.
    pub fn terms(&self) -> impl Iterator<Item = (Complex64, PauliTerm)> + '_ {
        self.terms.iter().map(move |(&(x, z), &c)| {
            (
                c,
                PauliTerm {
                    n_qubits: self.n_qubits,
                    x,
                    z,
                    phase: Phase::ONE,
                },
            )
        })
    }

    pub fn coefficient(&self, term: &PauliTerm) -> Complex64 {
        self.terms
            .get(&(term.x, term.z))
            .copied()
            .unwrap_or_default()
            * term.phase.conj().to_complex()
    }

    pub fn identity_coefficient(&self) -> Complex64 {
        self.terms.get(&(0, 0)).copied().unwrap_or_default()
    }

    /// Drops terms with `|c| < tol`.
    pub fn simplify(mut self, tol: f64) -> Self {
        self.terms.retain(|_, c| c.norm() >= tol);
        self
    }

    pub fn scale(mut self, factor: Complex64) -> Self {
        for c in self.terms.values_mut() {
            *c *= factor;
        }
        self
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        let mut out = self.clone();
        for (&k, &c) in &other.terms {
            *out.terms.entry(k).or_default() += c;
        }
        Ok(out)
    }

    pub fn mul(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        let mut out = PauliSum::new(self.n_qubits);
        for (ca, a) in self.terms() {
            for (cb, b) in other.terms() {
                out.add_term(ca * cb, &a.product_unchecked(&b));
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(&k, c)| (k, c.conj())).collect(),
        }
    }

    /// Largest imaginary part among the coefficients; zero for hermitian sums.
    pub fn hermiticity_error(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// `Σ|c|`.
    pub fn one_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// `output += Σ c P · input`.
    pub fn apply_into(&self, input: &[Complex64], output: &mut [Complex64]) {
        for (c, t) in self.terms() {
            t.apply_into(c, input, output);
        }
    }

    pub fn apply(&self, input: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); input.len()];
        self.apply_into(input, &mut out);
        out
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for (c, t) in self.terms() {
            for b in 0..dim {
                let (row, phase) = t.apply_to_basis(b as u64);
                m[(row as usize, b)] += c * phase;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliTerm {
        s.parse().unwrap()
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        assert_eq!(p("X").product(&p("Z")).unwrap(), p("-iY"));
        assert_eq!(p("Z").product(&p("X")).unwrap(), p("iY"));
        assert_eq!(p("Y").product(&p("Y")).unwrap(), p("I"));
    }

    #[test]
    fn identity_is_neutral() {
        let a = p("-iXYZI");
        assert_eq!(PauliTerm::identity(4).product(&a).unwrap(), a);
        assert_eq!(a.product(&PauliTerm::identity(4)).unwrap(), a);
    }

    #[test]
    fn square_is_phase_squared() {
        for s in ["XYZ", "iXYZ", "-YYI", "-iZXY"] {
            let a = p(s);
            let sq = a.product(&a).unwrap();
            assert!(sq.is_identity());
            assert_eq!(sq.phase(), a.phase() * a.phase());
        }
    }

    #[test]
    fn mismatched_sizes_rejected() {
        assert!(matches!(
            p("XX").product(&p("X")),
            Err(Error::QubitMismatch(2, 1))
        ));
    }

    #[test]
    fn letters_round_trip() {
        for s in ["XIZY", "-iZZ", "iX", "-YI"] {
            assert_eq!(p(s).to_string(), s);
        }
    }

    #[test]
    fn masks_checked() {
        assert!(PauliTerm::new(2, 0b100, 0, Phase::ONE).is_err());
    }

    #[test]
    fn sum_merges_and_tracks_phase() {
        let mut s = PauliSum::new(1);
        s.add_term(Complex64::new(1.0, 0.0), &p("X"));
        s.add_term(Complex64::new(2.0, 0.0), &p("-X"));
        assert_eq!(s.len(), 1);
        assert!((s.coefficient(&p("X")) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        let s = s
            .add(&PauliSum::from_terms(1, [(Complex64::new(1.0, 0.0), &p("X"))]).unwrap())
            .unwrap();
        assert!(s.simplify(DROP_TOLERANCE).is_empty());
    }
}
