//! Krylov matrices, the regularized generalized eigensolver and the direct
//! energy derivative.

mod derivative;
mod matrices;
mod problem;
mod solve;

pub use derivative::{
    chebyshev_to_monomial, direct_energy_derivative, generalized_eigenvalue_derivative,
    DirectDerivative,
};
pub use matrices::{
    build_matrices, count_distinct_measurements, KrylovBasis, KrylovMatrices, MeasurementMode,
    MAX_DIM,
};
pub use problem::KrylovProblem;
pub use solve::{solve, KrylovSolution, RELATIVE_RANK_FLOOR};
