//! Dense statevector backend and the LCU block encoding.

mod block;
mod exact;
mod state;

pub use block::{chebyshev_apply, chebyshev_vectors, BlockEncoding, ChebyshevRoute};
pub use exact::{hermitian_eigen, sector_basis, sector_ground_state};
pub use state::{max_qubits, StateVector, DEFAULT_MAX_QUBITS};
