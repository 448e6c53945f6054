use nalgebra::DMatrix;
use num_complex::Complex64;

use super::fermion::{jordan_wigner, FermionOperator};
use super::lcu::LcuOperator;
use super::pauli::{PauliSum, DROP_TOLERANCE};
use crate::error::{Error, Result};

/// Dense real rank-4 tensor of side `n`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Tensor4 {
            n,
            data: vec![0.0; n.pow(4)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn index(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.n + q) * self.n + r) * self.n + s
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.data[self.index(p, q, r, s)]
    }

    pub fn set(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        let i = self.index(p, q, r, s);
        self.data[i] = v;
    }

    /// Writes `v` to all eight positions related by real chemists' symmetry.
    pub fn set_symmetric(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        for (a, b, c, d) in symmetry_orbit(p, q, r, s) {
            self.set(a, b, c, d, v);
        }
    }

    pub fn max_symmetry_violation(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.get(p, q, r, s);
                        for (a, b, c, d) in symmetry_orbit(p, q, r, s) {
                            worst = worst.max((self.get(a, b, c, d) - v).abs());
                        }
                    }
                }
            }
        }
        worst
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Tensor4 {
            n: self.n,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn axpy(&mut self, a: f64, other: &Tensor4) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += a * y;
        }
    }
}

pub(crate) fn symmetry_orbit(
    p: usize,
    q: usize,
    r: usize,
    s: usize,
) -> [(usize, usize, usize, usize); 8] {
    [
        (p, q, r, s),
        (q, p, r, s),
        (p, q, s, r),
        (q, p, s, r),
        (r, s, p, q),
        (s, r, p, q),
        (r, s, q, p),
        (s, r, q, p),
    ]
}

/// Effective one-body matrix `k_pq = h_pq − ½ Σ_r (pr|rq)`.
pub fn effective_one_body(h: &DMatrix<f64>, g: &Tensor4) -> DMatrix<f64> {
    let n = h.nrows();
    DMatrix::from_fn(n, n, |p, q| {
        h[(p, q)] - 0.5 * (0..n).map(|r| g.get(p, r, r, q)).sum::<f64>()
    })
}

/// Electronic-structure Hamiltonian
/// `E_nuc + Σ k_pq Ê_pq + ½ Σ g_pqrs Ê_pq Ê_rs` over spatial orbitals.
///
/// `h` holds the conventional one-electron integrals (as in FCIDUMP) and `k`
/// the effective one-body operator derived from `h` and `g`. Spin orbitals are
/// interleaved: `2p` is `p`α and `2p+1` is `p`β.
#[derive(Clone, Debug, PartialEq)]
pub struct MolecularHamiltonian {
    pub n_electrons: usize,
    pub ms2: i64,
    pub e_nuc: f64,
    pub h: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub g: Tensor4,
}

impl MolecularHamiltonian {
    pub fn new(
        n_electrons: usize,
        ms2: i64,
        e_nuc: f64,
        h: DMatrix<f64>,
        g: Tensor4,
    ) -> Result<Self> {
        let n = h.nrows();
        if h.ncols() != n || g.n() != n {
            return Err(Error::Invalid("integral shapes disagree".into()));
        }
        let asym = (&h - h.transpose()).abs().max();
        if asym > 1e-10 {
            return Err(Error::Invalid(format!(
                "one-body matrix not symmetric ({asym:e})"
            )));
        }
        let gsym = g.max_symmetry_violation();
        if gsym > 1e-10 {
            return Err(Error::Invalid(format!(
                "two-body tensor lacks 8-fold symmetry ({gsym:e})"
            )));
        }
        if n_electrons > 2 * n
            || (n_electrons as i64 + ms2) % 2 != 0
            || ms2.unsigned_abs() as usize > n_electrons
        {
            return Err(Error::Invalid(format!(
                "{n_electrons} electrons with MS2={ms2} do not fit {n} orbitals"
            )));
        }
        let k = effective_one_body(&h, &g);
        Ok(MolecularHamiltonian {
            n_electrons,
            ms2,
            e_nuc,
            h,
            k,
            g,
        })
    }

    pub fn n_orbitals(&self) -> usize {
        self.h.nrows()
    }

    pub fn n_spin_orbitals(&self) -> usize {
        2 * self.n_orbitals()
    }

    /// Reference determinant: the lowest α and β orbitals, as a JW bit mask.
    pub fn reference_state(&self) -> u64 {
        let n_alpha = (self.n_electrons as i64 + self.ms2) / 2;
        let n_beta = self.n_electrons as i64 - n_alpha;
        let mut mask = 0u64;
        for p in 0..n_alpha as usize {
            mask |= 1 << (2 * p);
        }
        for p in 0..n_beta as usize {
            mask |= 1 << (2 * p + 1);
        }
        mask
    }

    /// `self + θ·(dE, dh, dg)`, with `k` rebuilt from the displaced integrals.
    pub fn displaced(&self, theta: f64, de: f64, dh: &DMatrix<f64>, dg: &Tensor4) -> Result<Self> {
        let mut g = self.g.clone();
        g.axpy(theta, dg);
        MolecularHamiltonian::new(
            self.n_electrons,
            self.ms2,
            self.e_nuc + theta * de,
            &self.h + dh * theta,
            g,
        )
    }
}

/// Pauli image of `e + Σ k_pq Ê_pq + ½ Σ g_pqrs Ê_pq Ê_rs` with the spatial
/// integrals expanded over interleaved spin orbitals.
pub fn integral_operator(e: f64, k: &DMatrix<f64>, g: &Tensor4) -> Result<PauliSum> {
    let n = k.nrows();
    let nq = 2 * n;
    let mut op = FermionOperator::scalar(Complex64::new(e, 0.0));
    for p in 0..n {
        for q in 0..n {
            let v = k[(p, q)];
            if v == 0.0 {
                continue;
            }
            for sigma in 0..2 {
                op = op.add(
                    &FermionOperator::excitation(2 * p + sigma, 2 * q + sigma)
                        .scale(Complex64::new(v, 0.0)),
                );
            }
        }
    }
    let mut total = jordan_wigner(&op, nq)?;
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = g.get(p, q, r, s);
                    if v == 0.0 {
                        continue;
                    }
                    for sigma in 0..2 {
                        for tau in 0..2 {
                            let de = FermionOperator::double_excitation(
                                2 * p + sigma,
                                2 * q + sigma,
                                2 * r + tau,
                                2 * s + tau,
                            );
                            let jw = jordan_wigner(&de, nq)?;
                            total = total.add(&jw.scale(Complex64::new(0.5 * v, 0.0)))?;
                        }
                    }
                }
            }
        }
    }
    Ok(total.simplify(DROP_TOLERANCE))
}

pub fn molecular_pauli_sum(mol: &MolecularHamiltonian) -> Result<PauliSum> {
    integral_operator(mol.e_nuc, &mol.k, &mol.g)
}

/// Builds the LCU of a molecular Hamiltonian, identity term included.
pub fn assemble_hamiltonian(mol: &MolecularHamiltonian) -> Result<LcuOperator> {
    LcuOperator::from_pauli_sum(&molecular_pauli_sum(mol)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_only() {
        let mol =
            MolecularHamiltonian::new(0, 0, 7.0, DMatrix::zeros(1, 1), Tensor4::zeros(1)).unwrap();
        let lcu = assemble_hamiltonian(&mol).unwrap();
        assert_eq!(lcu.len(), 1);
        assert!(lcu.terms()[0].1.is_identity());
        assert_eq!(lcu.lambda(), 7.0);
    }

    #[test]
    fn symmetric_setter_fills_orbit() {
        let mut g = Tensor4::zeros(3);
        g.set_symmetric(0, 1, 2, 1, 0.3);
        assert_eq!(g.get(2, 1, 1, 0), 0.3);
        assert_eq!(g.max_symmetry_violation(), 0.0);
        g.set(0, 1, 2, 1, 0.2);
        assert!(g.max_symmetry_violation() > 0.09);
    }

    #[test]
    fn reference_occupation() {
        let mol =
            MolecularHamiltonian::new(3, 1, 0.0, DMatrix::zeros(3, 3), Tensor4::zeros(3)).unwrap();
        assert_eq!(mol.reference_state(), 0b0111);
        let mol =
            MolecularHamiltonian::new(4, 0, 0.0, DMatrix::zeros(3, 3), Tensor4::zeros(3)).unwrap();
        assert_eq!(mol.reference_state(), 0b1111);
    }

    #[test]
    fn rejects_asymmetric_integrals() {
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(MolecularHamiltonian::new(2, 0, 0.0, h, Tensor4::zeros(2)).is_err());
    }
}
