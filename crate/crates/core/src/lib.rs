//! Quantum Krylov subspace diagonalization with QSP state preparation and
//! RDM-based nuclear gradients, simulated on a dense statevector.
//!
//! The pipeline runs as follows:
//! integrals ([`ingest`]) become a Pauli LCU ([`operators`]), which is
//! block-encoded ([`simulator`]) to build Krylov matrices ([`krylov`]). The
//! Krylov ground state is prepared with QSP ([`qsp`]) and the RDMs measured
//! on it are contracted into a nuclear gradient ([`gradients`]).

pub mod error;
pub mod format;
pub mod gradients;
pub mod ingest;
pub mod krylov;
pub mod operators;
pub mod qsp;
pub mod simulator;

pub use error::{Error, Result};
pub use num_complex::Complex64;
