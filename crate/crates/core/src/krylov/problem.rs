use nalgebra::DVector;
use num_complex::Complex64;

use super::matrices::{build_matrices, KrylovBasis, KrylovMatrices};
use super::solve::{solve, KrylovSolution};
use crate::error::{Error, Result};
use crate::operators::{molecular_pauli_sum, LcuOperator, MolecularHamiltonian, PauliSum};
use crate::simulator::{BlockEncoding, ChebyshevRoute, StateVector};

/// A physical Hamiltonian prepared for Krylov diagonalization.
///
/// The identity component of `Ĥ` is removed and kept as `shift`; the rest is
/// block-encoded as `H = (Ĥ − shift)/λ`. Physical energies are `λE + shift`.
#[derive(Clone, Debug)]
pub struct KrylovProblem {
    hamiltonian: PauliSum,
    be: BlockEncoding,
    shift: f64,
    psi0: StateVector,
    basis: KrylovBasis,
    route: ChebyshevRoute,
}

impl KrylovProblem {
    pub fn new(hamiltonian: &PauliSum, psi0: StateVector) -> Result<Self> {
        let (lcu, shift) = LcuOperator::from_pauli_sum(hamiltonian)?.split_identity();
        if psi0.n_system() != hamiltonian.n_qubits() || psi0.n_ancilla() != 0 {
            return Err(Error::QubitMismatch(
                psi0.n_system(),
                hamiltonian.n_qubits(),
            ));
        }
        Ok(KrylovProblem {
            hamiltonian: hamiltonian.clone(),
            be: BlockEncoding::new(lcu)?,
            shift,
            psi0,
            basis: KrylovBasis::Chebyshev,
            route: ChebyshevRoute::Qubitized,
        })
    }

    /// Molecular Hamiltonian started from its reference determinant.
    pub fn from_molecule(mol: &MolecularHamiltonian) -> Result<Self> {
        let h = molecular_pauli_sum(mol)?;
        let psi0 = StateVector::basis(h.n_qubits(), 0, mol.reference_state() as usize)?;
        KrylovProblem::new(&h, psi0)
    }

    pub fn with_basis(mut self, basis: KrylovBasis) -> Self {
        self.basis = basis;
        self
    }

    pub fn with_route(mut self, route: ChebyshevRoute) -> Self {
        self.route = route;
        self
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.hamiltonian
    }

    pub fn block_encoding(&self) -> &BlockEncoding {
        &self.be
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn lambda(&self) -> f64 {
        self.be.lambda()
    }

    pub fn psi0(&self) -> &StateVector {
        &self.psi0
    }

    pub fn basis(&self) -> KrylovBasis {
        self.basis
    }

    pub fn route(&self) -> ChebyshevRoute {
        self.route
    }

    pub fn physical_energy(&self, rescaled: f64) -> f64 {
        self.lambda() * rescaled + self.shift
    }

    pub fn matrices(&self, dim: usize) -> Result<KrylovMatrices> {
        build_matrices(&self.be, &self.psi0, dim, self.basis, self.route)
    }

    pub fn solve(&self, dim: usize, s: f64) -> Result<(KrylovMatrices, KrylovSolution)> {
        let mat = self.matrices(dim)?;
        let sol = solve(&mat, s)?;
        Ok((mat, sol))
    }

    /// `Σ c_i p_i(H)|ψ₀⟩` with `p_i` the basis polynomials.
    pub fn krylov_state(&self, c: &DVector<f64>) -> Result<StateVector> {
        let h = self.be.normalized_operator();
        let d = 1usize << self.psi0.n_system();
        let mut acc = vec![Complex64::default(); d];
        let mut prev: Option<StateVector> = None;
        let mut cur = self.psi0.clone();
        for (i, &ci) in c.iter().enumerate() {
            for (a, v) in acc.iter_mut().zip(cur.amplitudes()) {
                *a += v * ci;
            }
            if i + 1 == c.len() {
                break;
            }
            let hv = cur.apply_pauli_sum(&h)?;
            let next = match (self.basis, &prev) {
                (KrylovBasis::Chebyshev, Some(p)) => {
                    let amps = hv
                        .amplitudes()
                        .iter()
                        .zip(p.amplitudes())
                        .map(|(a, b)| a * 2.0 - b)
                        .collect();
                    StateVector::system(amps)?
                }
                _ => hv,
            };
            prev = Some(std::mem::replace(&mut cur, next));
        }
        StateVector::system(acc)
    }
}
