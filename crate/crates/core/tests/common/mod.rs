#![allow(dead_code)]

use krylovgrad::ingest::{parse_derivatives, parse_fcidump, IntegralDerivatives};
use krylovgrad::operators::{MolecularHamiltonian, Tensor4};
use krylovgrad::Complex64;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn h2() -> MolecularHamiltonian {
    parse_fcidump(include_str!("../../data/h2_sto3g.fcidump")).unwrap()
}

pub fn h2_derivs() -> IntegralDerivatives {
    parse_derivatives(include_str!("../../data/h2_sto3g.derivs"), 2).unwrap()
}

pub fn h2o() -> MolecularHamiltonian {
    parse_fcidump(include_str!("../../data/h2o_cas44.fcidump")).unwrap()
}

pub fn h2o_derivs() -> IntegralDerivatives {
    parse_derivatives(include_str!("../../data/h2o_cas44.derivs"), 4).unwrap()
}

/// H2 with a symmetry-breaking perturbation, so the singlet Krylov space
/// from the reference has dimension three.
pub fn distorted_h2() -> MolecularHamiltonian {
    let base = h2();
    let mut dh = DMatrix::zeros(2, 2);
    dh[(0, 1)] = 0.07;
    dh[(1, 0)] = 0.07;
    let mut dg = Tensor4::zeros(2);
    dg.set_symmetric(0, 0, 0, 1, 0.03);
    base.displaced(1.0, 0.0, &dh, &dg).unwrap()
}

/// Random symmetric integral derivatives for `n` orbitals.
pub fn random_direction(n: usize, seed: u64) -> (f64, DMatrix<f64>, Tensor4) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dh = DMatrix::zeros(n, n);
    for p in 0..n {
        for q in 0..=p {
            let v = rng.random_range(-0.3..0.3);
            dh[(p, q)] = v;
            dh[(q, p)] = v;
        }
    }
    let mut dg = Tensor4::zeros(n);
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    if dg.get(p, q, r, s) == 0.0 {
                        dg.set_symmetric(p, q, r, s, rng.random_range(-0.2..0.2));
                    }
                }
            }
        }
    }
    (rng.random_range(-0.5..0.5), dh, dg)
}

/// `a_mode |ψ⟩` (or `a†`) on occupation bitstrings with the canonical
/// ordering sign `(−1)^{number of occupied modes below mode}`.
pub fn ladder(psi: &[Complex64], mode: usize, dagger: bool) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); psi.len()];
    for (b, &a) in psi.iter().enumerate() {
        if a == Complex64::default() {
            continue;
        }
        let occupied = b >> mode & 1 == 1;
        if occupied == dagger {
            continue;
        }
        let sign = if (b & ((1 << mode) - 1)).count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        out[b ^ (1 << mode)] += a * sign;
    }
    out
}

/// Spin-summed `Ê_pq |ψ⟩` over interleaved spin orbitals.
pub fn excite(psi: &[Complex64], p: usize, q: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); psi.len()];
    for sigma in 0..2 {
        let t = ladder(&ladder(psi, 2 * q + sigma, false), 2 * p + sigma, true);
        for (o, v) in out.iter_mut().zip(t) {
            *o += v;
        }
    }
    out
}

pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Dense-oracle `⟨ψ|Ê_pq|ψ⟩` and `⟨ψ|Ê_pq Ê_rs|ψ⟩`.
pub fn oracle_rdms(psi: &[Complex64], n: usize) -> (DMatrix<f64>, Tensor4) {
    let mut gamma = DMatrix::zeros(n, n);
    let mut two = Tensor4::zeros(n);
    for p in 0..n {
        for q in 0..n {
            let epq = excite(psi, p, q);
            gamma[(p, q)] = inner(psi, &epq).re;
            for r in 0..n {
                for s in 0..n {
                    let ers = excite(psi, r, s);
                    two.set(p, q, r, s, inner(&excite(psi, q, p), &ers).re);
                }
            }
        }
    }
    (gamma, two)
}
