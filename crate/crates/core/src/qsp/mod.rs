//! Quantum signal processing: phase fitting for the Krylov polynomial and
//! emulation of the circuit that prepares the Krylov ground state.

mod phases;
mod poly;
mod prepare;

pub use phases::{
    fit_phases, qsp_unitary_scalar, PhaseCache, PhaseCacheEntry, PhaseFactors, FIT_TOLERANCE,
    MAX_ITERATIONS,
};
pub use poly::{chebyshev_eval, compute_eta, Parity, ParityPart, TargetPolynomial, ETA_GRID};
pub use prepare::{prepare_krylov_state, FittedPart, PreparedState, QspProgram};
