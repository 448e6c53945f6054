use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::StateVector;
use crate::error::{Error, Result};
use crate::operators::PauliSum;

/// Eigenvalues (ascending) and column eigenvectors of a dense hermitian matrix.
pub fn hermitian_eigen(m: DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Basis states with the particle number and `2S_z` of `reference`, with
/// even qubits α and odd qubits β.
pub fn sector_basis(n_qubits: usize, reference: u64) -> Vec<u64> {
    const ALPHA: u64 = 0x5555_5555_5555_5555;
    let count = |b: u64| (b.count_ones(), (b & ALPHA).count_ones());
    let want = count(reference);
    (0..1u64 << n_qubits)
        .filter(|&b| count(b) == want)
        .collect()
}

/// Lowest eigenpair of `op` within the sector of `reference`.
pub fn sector_ground_state(op: &PauliSum, reference: u64) -> Result<(f64, StateVector)> {
    let n = op.n_qubits();
    if reference >> n != 0 {
        return Err(Error::Invalid(
            "reference state outside the register".into(),
        ));
    }
    let basis = sector_basis(n, reference);
    let index: HashMap<u64, usize> = basis.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let dim = basis.len();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (c, t) in op.terms() {
        for (col, &b) in basis.iter().enumerate() {
            let (img, phase) = t.apply_to_basis(b);
            if let Some(&row) = index.get(&img) {
                m[(row, col)] += c * phase;
            }
        }
    }
    let (values, vectors) = hermitian_eigen(m);
    let mut amps = vec![Complex64::default(); 1 << n];
    for (i, &b) in basis.iter().enumerate() {
        amps[b as usize] = vectors[(i, 0)];
    }
    // fix the global phase on the largest component
    let pivot = amps
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or_default();
    if pivot.norm() > 0.0 {
        let f = pivot.conj() / pivot.norm();
        for a in &mut amps {
            *a *= f;
        }
    }
    Ok((values[0], StateVector::system(amps)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_sizes() {
        assert_eq!(sector_basis(8, 0b1111).len(), 36);
        assert_eq!(sector_basis(4, 0b0011).len(), 4);
        assert_eq!(sector_basis(4, 0b0001).len(), 2);
    }

    #[test]
    fn restricts_to_sector() {
        // Z_0 is lowest with qubit 0 occupied, which the β-only sector forbids
        let mut op = PauliSum::new(2);
        op.add_term(Complex64::new(1.0, 0.0), &"ZI".parse().unwrap());
        let (e, psi) = sector_ground_state(&op, 0b10).unwrap();
        assert!((e - 1.0).abs() < 1e-12);
        assert!((psi.amplitudes()[2].norm() - 1.0).abs() < 1e-12);
    }
}
