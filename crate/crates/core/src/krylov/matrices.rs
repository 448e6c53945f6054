use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::g12;
use crate::simulator::{chebyshev_vectors, BlockEncoding, ChebyshevRoute, StateVector};

/// Largest Krylov dimension accepted.
pub const MAX_DIM: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KrylovBasis {
    /// `H^k |ψ₀⟩`
    Monomial,
    /// `T_k(H) |ψ₀⟩`
    Chebyshev,
}

/// Projected Hamiltonian `H̃` and overlap `S̃` in a Krylov basis.
///
/// `moments` holds `⟨ψ₀|H^n|ψ₀⟩` (monomial) or `⟨ψ₀|T_n(H)|ψ₀⟩` (Chebyshev)
/// for `n < 2D`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrylovMatrices {
    pub basis: KrylovBasis,
    pub h: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub moments: Vec<f64>,
}

impl KrylovMatrices {
    /// Hankel matrices `H̃_ij = m_{i+j+1}`, `S̃_ij = m_{i+j}`.
    pub fn from_moments(moments: &[f64], dim: usize) -> Result<Self> {
        if moments.len() < 2 * dim {
            return Err(Error::Invalid(format!(
                "{} moments cannot fill dimension {dim}",
                moments.len()
            )));
        }
        Ok(KrylovMatrices {
            basis: KrylovBasis::Monomial,
            h: DMatrix::from_fn(dim, dim, |i, j| moments[i + j + 1]),
            s: DMatrix::from_fn(dim, dim, |i, j| moments[i + j]),
            moments: moments[..2 * dim].to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    /// Long-format CSV: `matrix,i,j,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("matrix,i,j,value\n");
        for (name, m) in [("H", &self.h), ("S", &self.s)] {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    let _ = writeln!(out, "{name},{i},{j},{}", g12(m[(i, j)]));
                }
            }
        }
        out
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::Invalid("Krylov dimension must be at least 1".into()));
    }
    if dim > MAX_DIM {
        return Err(Error::DimensionCap { dim, cap: MAX_DIM });
    }
    Ok(())
}

fn check_normalized(psi0: &StateVector) -> Result<()> {
    let n = psi0.norm();
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::Invalid(format!("initial state has norm {n}")));
    }
    Ok(())
}

/// `H^k |ψ₀⟩` for `k = 0..count`.
pub(crate) fn power_vectors(
    be: &BlockEncoding,
    psi0: &StateVector,
    count: usize,
) -> Result<Vec<StateVector>> {
    let h = be.normalized_operator();
    let mut out: Vec<StateVector> = Vec::with_capacity(count);
    if count > 0 {
        out.push(psi0.clone());
    }
    for k in 1..count {
        let next = out[k - 1].apply_pauli_sum(&h)?;
        out.push(next);
    }
    Ok(out)
}

/// Builds `H̃` and `S̃` of dimension `dim` for `H = Ĥ/λ`.
///
/// Chebyshev vectors come from `route`; monomial matrices are assembled from
/// the moment sequence and are therefore exactly Hankel.
pub fn build_matrices(
    be: &BlockEncoding,
    psi0: &StateVector,
    dim: usize,
    basis: KrylovBasis,
    route: ChebyshevRoute,
) -> Result<KrylovMatrices> {
    check_dim(dim)?;
    check_normalized(psi0)?;
    match basis {
        KrylovBasis::Monomial => {
            let u = power_vectors(be, psi0, dim + 1)?;
            let mut moments = vec![0.0; 2 * dim];
            for k in 0..dim {
                moments[2 * k] = u[k].inner(&u[k])?.re;
                moments[2 * k + 1] = u[k].inner(&u[k + 1])?.re;
            }
            KrylovMatrices::from_moments(&moments, dim)
        }
        KrylovBasis::Chebyshev => {
            let v = chebyshev_vectors(be, psi0, dim, route)?;
            let op = be.normalized_operator();
            let hv = v
                .iter()
                .map(|x| x.apply_pauli_sum(&op))
                .collect::<Result<Vec<_>>>()?;
            let mut h = DMatrix::zeros(dim, dim);
            let mut s = DMatrix::zeros(dim, dim);
            for i in 0..dim {
                for j in i..dim {
                    let hij = 0.5 * (v[i].inner(&hv[j])?.re + hv[i].inner(&v[j])?.re);
                    let sij = v[i].inner(&v[j])?.re;
                    h[(i, j)] = hij;
                    h[(j, i)] = hij;
                    s[(i, j)] = sij;
                    s[(j, i)] = sij;
                }
            }
            let moments = chebyshev_moments(&h, &s);
            Ok(KrylovMatrices {
                basis,
                h,
                s,
                moments,
            })
        }
    }
}

/// Recovers `μ_n = ⟨T_n⟩` for `n < 2D` from the Chebyshev matrices using
/// `2 T_i T_j = T_{i+j} + T_{|i−j|}` and `2x T_j = T_{j+1} + T_{|j−1|}`.
fn chebyshev_moments(h: &DMatrix<f64>, s: &DMatrix<f64>) -> Vec<f64> {
    let d = h.nrows();
    let mut mu = vec![0.0; 2 * d];
    mu[0] = s[(0, 0)];
    mu[1] = h[(0, 0)];
    for k in 1..d {
        mu[2 * k] = 2.0 * s[(k, k)] - mu[0];
    }
    for k in 1..d.saturating_sub(1) {
        mu[2 * k + 1] = 2.0 * s[(k, k + 1)] - mu[1];
    }
    if d >= 2 {
        // ⟨T_{D−1} x T_{D−1}⟩ = (μ_{2D−1} + μ_{2D−3} + 2μ_1) / 4
        let top = d - 1;
        mu[2 * d - 1] = 4.0 * h[(top, top)] - 2.0 * mu[1] - mu[2 * d - 3];
    }
    mu
}

/// Number of distinct expectation values a measurement scheme needs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasurementMode {
    /// The moments `⟨ψ₀|H^n|ψ₀⟩`, `n = 0..2D−1`, without the trivial `n = 0`.
    Energy,
    /// The products `⟨ψ₀|H^a V H^b|ψ₀⟩` entering the direct derivative.
    DirectGradient,
}

/// `2D − 1` for energies; `D(2D − 1)` ordered pairs `(a, b)` with
/// `a + b ≤ 2D − 2` for the direct derivative.
pub fn count_distinct_measurements(dim: usize, mode: MeasurementMode) -> usize {
    match mode {
        MeasurementMode::Energy => 2 * dim - 1,
        MeasurementMode::DirectGradient => dim * (2 * dim - 1),
    }
}
