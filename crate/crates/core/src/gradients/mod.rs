//! RDM measurement on prepared Krylov states, nuclear gradients by the chain
//! rule, and the estimator variance benchmark.

mod bench;
mod gradient;
mod rdm;

pub use bench::{benchmark_csv, variance_benchmark, BenchmarkRow, BENCHMARK_HEADER};
pub use gradient::{
    compute_gradient, ensemble_gradient, krylov_rdms, nuclear_gradient, sample_rdms, EnsembleStats,
    GradientResult, RdmRun,
};
pub use rdm::{
    excitation_operator, hermitian_parts, measure_rdms, pauli_stats, rdm_element_coherent,
    rdm_element_postselect, PauliStats, RdmPair, RdmSource,
};
