//! Pauli algebra, fermionic operators, the Jordan–Wigner map and molecular
//! Hamiltonian assembly.

mod fermion;
mod hamiltonian;
mod lcu;
mod pauli;

pub use fermion::{jordan_wigner, FermionOperator, Ladder};
pub use hamiltonian::{
    assemble_hamiltonian, effective_one_body, integral_operator, molecular_pauli_sum,
    MolecularHamiltonian, Tensor4,
};
pub use lcu::LcuOperator;
pub use pauli::{PauliSum, PauliTerm, Phase, DROP_TOLERANCE};
