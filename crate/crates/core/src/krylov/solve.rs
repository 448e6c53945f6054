use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::matrices::KrylovMatrices;
use crate::error::{Error, Result};
use crate::format::g12;

/// Overlap eigenvalues below this fraction of the largest are always dropped,
/// which keeps `s = 0` well defined for rank-deficient `S̃`.
pub const RELATIVE_RANK_FLOOR: f64 = 1e-12;

/// Solution of `H̃c = E S̃c` by canonical orthogonalization.
///
/// Energies are in units of the block-encoded `H` and ascend. Each `c` is
/// `S̃`-normalized with its first significant entry positive.
#[derive(Clone, Debug)]
pub struct KrylovSolution {
    pub energies: Vec<f64>,
    pub coefficients: Vec<DVector<f64>>,
    pub rank: usize,
    pub threshold: f64,
    /// Eigenvalues of `S̃`, ascending, clamped at zero.
    pub overlap_eigenvalues: Vec<f64>,
    /// Matching eigenvectors as columns.
    pub overlap_vectors: DMatrix<f64>,
}

impl KrylovSolution {
    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    /// CSV with columns `kind,index,value` for energies and overlap eigenvalues.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,index,value\n");
        for (i, e) in self.energies.iter().enumerate() {
            let _ = writeln!(out, "energy,{i},{}", g12(*e));
        }
        for (i, l) in self.overlap_eigenvalues.iter().enumerate() {
            let _ = writeln!(out, "overlap_eigenvalue,{i},{}", g12(*l));
        }
        out
    }
}

fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).abs().max()
}

/// Regularized generalized eigensolve: overlap directions with eigenvalue
/// below `s` are discarded before diagonalizing
/// `(UΛ^{-1/2})ᵀ H̃ (UΛ^{-1/2})`.
pub fn solve(mat: &KrylovMatrices, s: f64) -> Result<KrylovSolution> {
    if !(s >= 0.0) {
        return Err(Error::Invalid(format!(
            "threshold must be non-negative, got {s}"
        )));
    }
    let scale = mat.h.abs().max().max(mat.s.abs().max()).max(1.0);
    let asym = asymmetry(&mat.h).max(asymmetry(&mat.s));
    if asym > 1e-10 * scale {
        return Err(Error::Invalid(format!(
            "Krylov matrices are not symmetric ({asym:e})"
        )));
    }
    let (lambda, u) = sorted_eigen(mat.s.clone());
    let lambda: Vec<f64> = lambda.into_iter().map(|l| l.max(0.0)).collect();
    let top = lambda.last().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..lambda.len())
        .filter(|&i| lambda[i] >= s && lambda[i] > RELATIVE_RANK_FLOOR * top)
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptySubspace(s));
    }
    let d = mat.dim();
    let x = DMatrix::from_fn(d, keep.len(), |r, c| {
        u[(r, keep[c])] / lambda[keep[c]].sqrt()
    });
    let mut reduced = x.transpose() * &mat.h * &x;
    reduced = (&reduced + reduced.transpose()) * 0.5;
    let (energies, y) = sorted_eigen(reduced);
    let coefficients = (0..keep.len())
        .map(|m| {
            let mut c = &x * y.column(m);
            let big = c.amax();
            if let Some(first) = c.iter().copied().find(|v| v.abs() > 1e-8 * big) {
                if first < 0.0 {
                    c.neg_mut();
                }
            }
            c
        })
        .collect();
    Ok(KrylovSolution {
        energies,
        coefficients,
        rank: keep.len(),
        threshold: s,
        overlap_eigenvalues: lambda,
        overlap_vectors: u,
    })
}
