mod common;

use krylovgrad::krylov::*;
use krylovgrad::operators::{PauliSum, PauliTerm};
use krylovgrad::simulator::{ChebyshevRoute, StateVector};
use krylovgrad::{Complex64, Error};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];

fn random_lcu(n: usize, terms: usize, rng: &mut ChaCha8Rng) -> PauliSum {
    let mut h = PauliSum::new(n);
    h.add_term(
        Complex64::new(rng.random_range(-1.0..1.0), 0.0),
        &PauliTerm::identity(n),
    );
    for _ in 0..terms {
        let label: String = (0..n).map(|_| LETTERS[rng.random_range(0..4)]).collect();
        let c = rng.random_range(0.2..1.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        h.add_term(Complex64::new(c, 0.0), &label.parse().unwrap());
    }
    h
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let amps: Vec<Complex64> = (0..1 << n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
        .collect();
    let mut s = StateVector::system(amps).unwrap();
    s.normalize().unwrap();
    s
}

fn dense(op: &PauliSum) -> DMatrix<Complex64> {
    let d = 1 << op.n_qubits();
    let mut m = DMatrix::zeros(d, d);
    for (c, t) in op.terms() {
        m += t.to_dense() * c;
    }
    m
}

/// `⟨ψ|A^n|ψ⟩` for `A = (Ĥ − shift)/λ` by dense matrix powers.
fn dense_moments(problem: &KrylovProblem, count: usize) -> Vec<f64> {
    let d = 1 << problem.hamiltonian().n_qubits();
    let a = (dense(problem.hamiltonian())
        - DMatrix::identity(d, d) * Complex64::new(problem.shift(), 0.0))
        / Complex64::new(problem.lambda(), 0.0);
    let psi = DVector::from_column_slice(problem.psi0().amplitudes());
    let mut v = psi.clone();
    let mut out = Vec::new();
    for _ in 0..count {
        out.push(psi.dotc(&v).re);
        v = &a * v;
    }
    out
}

#[test]
fn monomial_matrices_are_hankel_and_match_dense_moments() {
    let problem = KrylovProblem::from_molecule(&common::h2o())
        .unwrap()
        .with_basis(KrylovBasis::Monomial);
    let mu = dense_moments(&problem, 20);
    for dim in 1..=10 {
        let m = problem.matrices(dim).unwrap();
        for i in 0..dim {
            for j in 0..dim {
                assert_eq!(m.s[(i, j)], m.moments[i + j]);
                assert_eq!(m.h[(i, j)], m.moments[i + j + 1]);
                assert!((m.s[(i, j)] - mu[i + j]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn measurement_counts_match_enumeration() {
    for dim in 1..=12 {
        // distinct moments in H̃ and S̃, less m_0 which is the norm
        let moments: std::collections::BTreeSet<usize> = (0..dim)
            .flat_map(|i| (0..dim).flat_map(move |j| [i + j, i + j + 1]))
            .collect();
        assert_eq!(
            count_distinct_measurements(dim, MeasurementMode::Energy),
            moments.len() - 1
        );
        let pairs = (0..2 * dim - 1).flat_map(|a| (0..2 * dim - 1).map(move |b| (a, b)));
        let gradient = pairs.filter(|(a, b)| a + b <= 2 * dim - 2).count();
        assert_eq!(
            count_distinct_measurements(dim, MeasurementMode::DirectGradient),
            gradient
        );
    }
    let q: Vec<usize> = (1..=6)
        .map(|d| count_distinct_measurements(d, MeasurementMode::DirectGradient))
        .collect();
    assert!(q.windows(3).all(|w| w[2] + w[0] - 2 * w[1] == 4));
}

#[test]
fn dimension_one_is_the_reference_expectation() {
    let mol = common::h2o();
    let problem = KrylovProblem::from_molecule(&mol).unwrap();
    let (_, sol) = problem.solve(1, 0.0).unwrap();
    let e = problem.psi0().expectation(problem.hamiltonian()).unwrap();
    assert!((problem.physical_energy(sol.energies[0]) - e).abs() < 1e-10);
    assert_eq!(sol.rank, 1);
}

#[test]
fn bases_and_routes_agree() {
    let base = KrylovProblem::from_molecule(&common::h2o()).unwrap();
    let reference = {
        let (_, s) = base
            .clone()
            .with_basis(KrylovBasis::Monomial)
            .solve(5, 0.0)
            .unwrap();
        s.energies[0]
    };
    for route in [ChebyshevRoute::Qubitized, ChebyshevRoute::Recurrence] {
        let (_, s) = base.clone().with_route(route).solve(5, 0.0).unwrap();
        assert!((s.energies[0] - reference).abs() < 1e-9, "{route:?}");
    }
}

#[test]
fn full_sector_dimension_is_exact() {
    let mol = common::distorted_h2();
    let problem = KrylovProblem::from_molecule(&mol).unwrap();
    let (exact, _) =
        krylovgrad::simulator::sector_ground_state(problem.hamiltonian(), mol.reference_state())
            .unwrap();
    let (_, sol) = problem.solve(4, 0.0).unwrap();
    assert!((problem.physical_energy(sol.energies[0]) - exact).abs() < 1e-9);
}

#[test]
fn threshold_above_spectrum_empties_subspace() {
    let problem = KrylovProblem::from_molecule(&common::h2()).unwrap();
    assert!(matches!(
        problem.solve(2, 1e6),
        Err(Error::EmptySubspace(_))
    ));
    assert!(matches!(problem.solve(0, 0.0), Err(Error::Invalid(_))));
    assert!(matches!(
        problem.solve(MAX_DIM + 1, 0.0),
        Err(Error::DimensionCap { .. })
    ));
}

#[test]
fn direct_derivative_matches_finite_differences_on_random_lcu() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h0 = random_lcu(3, 10, &mut rng);
    let v = random_lcu(3, 6, &mut rng);
    let psi0 = random_state(3, &mut rng);
    let energy = |theta: f64, dim: usize| {
        let h = h0
            .add(&v.clone().scale(Complex64::new(theta, 0.0)))
            .unwrap();
        let p = KrylovProblem::new(&h, psi0.clone()).unwrap();
        let (_, sol) = p.solve(dim, 0.0).unwrap();
        p.physical_energy(sol.energies[0])
    };
    let problem = KrylovProblem::new(&h0, psi0.clone()).unwrap();
    let h = 1e-5;
    for dim in 2..=4 {
        let d = direct_energy_derivative(&problem, &v, dim, 0.0, 0).unwrap();
        let fd = (energy(h, dim) - energy(-h, dim)) / (2.0 * h);
        assert!((d.value - fd).abs() < 1e-6, "D={dim}: {} vs {fd}", d.value);
        assert!((d.normalization - 1.0).abs() < 1e-8);
    }
}

#[test]
fn eigenvalue_derivative_formula() {
    // S = I reduces to first-order perturbation theory
    let s = DMatrix::<f64>::identity(2, 2);
    let dh = DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.1, -0.2]);
    let c = DVector::from_vec(vec![1.0, 0.0]);
    assert!(
        (generalized_eigenvalue_derivative(&s, &dh, &DMatrix::zeros(2, 2), &c, 0.0) - 0.3).abs()
            < 1e-15
    );
    let t = chebyshev_to_monomial(4);
    assert_eq!(
        t.row(3).iter().copied().collect::<Vec<_>>(),
        vec![0.0, -3.0, 0.0, 4.0]
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solution_is_overlap_orthonormal(seed in 0u64..10_000, dim in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_lcu(3, 8, &mut rng);
        let problem = KrylovProblem::new(&h, random_state(3, &mut rng)).unwrap();
        let (mat, sol) = problem.solve(dim, 1e-10).unwrap();
        prop_assert!(sol.rank >= 1 && sol.rank <= dim);
        prop_assert!(sol.energies.windows(2).all(|w| w[0] <= w[1]));
        for (i, ci) in sol.coefficients.iter().enumerate() {
            for (j, cj) in sol.coefficients.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((ci.dot(&(&mat.s * cj)) - want).abs() < 1e-7);
            }
            let r = &mat.h * ci - &mat.s * ci * sol.energies[i];
            prop_assert!(r.amax() < 1e-7);
        }
        // variational bound against the exact spectrum of the rescaled operator
        let (vals, _) = krylovgrad::simulator::hermitian_eigen(dense(problem.hamiltonian()));
        prop_assert!(problem.physical_energy(sol.energies[0]) >= vals[0] - 1e-9);
    }
}
