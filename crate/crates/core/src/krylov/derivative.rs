use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::matrices::{power_vectors, KrylovBasis};
use super::problem::KrylovProblem;
use crate::error::{Error, Result};
use crate::operators::PauliSum;

/// `dE/dθ = cᵀ(dH̃ − E dS̃)c / cᵀS̃c` for a generalized eigenpair `(E, c)`.
pub fn generalized_eigenvalue_derivative(
    s: &DMatrix<f64>,
    dh: &DMatrix<f64>,
    ds: &DMatrix<f64>,
    c: &DVector<f64>,
    energy: f64,
) -> f64 {
    let norm = c.dot(&(s * c));
    c.dot(&((dh - ds * energy) * c)) / norm
}

/// Monomial coefficients of the Chebyshev polynomials: row `i` holds `T_i`.
pub fn chebyshev_to_monomial(dim: usize) -> DMatrix<f64> {
    let mut t = DMatrix::zeros(dim, dim);
    if dim == 0 {
        return t;
    }
    t[(0, 0)] = 1.0;
    if dim > 1 {
        t[(1, 1)] = 1.0;
    }
    for i in 2..dim {
        for k in 0..dim {
            let shifted = if k > 0 { 2.0 * t[(i - 1, k - 1)] } else { 0.0 };
            t[(i, k)] = shifted - t[(i - 2, k)];
        }
    }
    t
}

/// Derivative of a Krylov energy with respect to a Hamiltonian parameter.
#[derive(Clone, Debug, Serialize)]
pub struct DirectDerivative {
    /// `dE/dθ` of the physical energy `λE + shift`.
    pub value: f64,
    /// `dE/dθ` of the energy of `H = (Ĥ − shift)/λ`.
    pub rescaled: f64,
    pub dlambda: f64,
    pub dshift: f64,
    /// Physical energy of the differentiated state.
    pub energy: f64,
    /// `cᵀS̃c`, equal to one up to round-off.
    pub normalization: f64,
}

/// `dH̃/dθ` and `dS̃/dθ` of the monomial basis for `dH/dθ = v`:
/// `dm_n = Σ_{a+b=n−1} ⟨ψ₀|H^a v H^b|ψ₀⟩`, `dH̃_ij = dm_{i+j+1}`, `dS̃_ij = dm_{i+j}`.
pub(crate) fn monomial_matrix_derivatives(
    problem: &KrylovProblem,
    v: &PauliSum,
    dim: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let u = power_vectors(problem.block_encoding(), problem.psi0(), 2 * dim - 1)?;
    let w = u
        .iter()
        .map(|x| x.apply_pauli_sum(v))
        .collect::<Result<Vec<_>>>()?;
    let mut dm = vec![0.0; 2 * dim];
    for (n, slot) in dm.iter_mut().enumerate().skip(1) {
        let mut acc = Complex64::default();
        for a in 0..n {
            acc += u[a].inner(&w[n - 1 - a])?;
        }
        *slot = acc.re;
    }
    let dh = DMatrix::from_fn(dim, dim, |i, j| dm[i + j + 1]);
    let ds = DMatrix::from_fn(dim, dim, |i, j| dm[i + j]);
    Ok((dh, ds))
}

/// Direct derivative of the Krylov energy of state `m` for `dĤ/dθ = v`.
///
/// `v` is the derivative of the physical Hamiltonian. The block encoding works
/// with `H = (Ĥ − shift)/λ`, so the derivative passed to the matrix elements is
/// `(v − dshift − λ'H)/λ` and the result is mapped back as
/// `λ'E + λ dE/dθ + dshift`.
pub fn direct_energy_derivative(
    problem: &KrylovProblem,
    v: &PauliSum,
    dim: usize,
    s: f64,
    m: usize,
) -> Result<DirectDerivative> {
    if v.n_qubits() != problem.hamiltonian().n_qubits() {
        return Err(Error::QubitMismatch(
            v.n_qubits(),
            problem.hamiltonian().n_qubits(),
        ));
    }
    let herr = v.hermiticity_error();
    if herr > 1e-10 * v.one_norm().max(1.0) {
        return Err(Error::NotHermitian(herr));
    }
    let (mat, sol) = problem.solve(dim, s)?;
    if m >= sol.energies.len() {
        return Err(Error::StateNotRetained {
            index: m,
            rank: sol.rank,
        });
    }
    let be = problem.block_encoding();
    let lambda = be.lambda();
    let dlambda = be.lcu().lambda_derivative(v);
    let dshift = v.identity_coefficient().re;
    let n = v.n_qubits();
    let v_rescaled = v
        .add(&PauliSum::identity(n, -dshift))?
        .add(
            &be.normalized_operator()
                .scale(Complex64::new(-dlambda, 0.0)),
        )?
        .scale(Complex64::new(1.0 / lambda, 0.0));

    let (mut dh, mut ds) = monomial_matrix_derivatives(problem, &v_rescaled, dim)?;
    if problem.basis() == KrylovBasis::Chebyshev {
        let t = chebyshev_to_monomial(dim);
        dh = &t * dh * t.transpose();
        ds = &t * ds * t.transpose();
    }
    let c = &sol.coefficients[m];
    let e = sol.energies[m];
    let rescaled = generalized_eigenvalue_derivative(&mat.s, &dh, &ds, c, e);
    Ok(DirectDerivative {
        value: dlambda * e + lambda * rescaled + dshift,
        rescaled,
        dlambda,
        dshift,
        energy: problem.physical_energy(e),
        normalization: c.dot(&(&mat.s * c)),
    })
}
