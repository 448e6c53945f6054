use krylovgrad::operators::{LcuOperator, PauliSum};
use krylovgrad::simulator::{chebyshev_apply, BlockEncoding, ChebyshevRoute, StateVector};
use krylovgrad::Complex64;
use nalgebra::{DMatrix, DVector};

fn example() -> PauliSum {
    let mut h = PauliSum::new(2);
    for (c, s) in [
        (0.7, "XZ"),
        (-0.4, "ZI"),
        (0.25, "YY"),
        (-0.15, "IX"),
        (0.3, "ZZ"),
    ] {
        h.add_term(Complex64::new(c, 0.0), &s.parse().unwrap());
    }
    h
}

fn dense(op: &PauliSum) -> DMatrix<Complex64> {
    let d = 1 << op.n_qubits();
    let mut m = DMatrix::zeros(d, d);
    for (c, t) in op.terms() {
        m += t.to_dense() * c;
    }
    m
}

fn encoding() -> BlockEncoding {
    BlockEncoding::new(LcuOperator::from_pauli_sum(&example()).unwrap()).unwrap()
}

#[test]
fn zero_block_is_normalized_hamiltonian() {
    let be = encoding();
    assert!((be.lambda() - 1.8).abs() < 1e-14);
    assert_eq!(be.n_ancilla(), 3);
    let m = be.to_dense().unwrap();
    let want = dense(&example()) / Complex64::new(be.lambda(), 0.0);
    let block = m.view((0, 0), (4, 4));
    assert!((block - want).camax() < 1e-14);
    // the whole matrix is unitary
    let u = &m * m.adjoint();
    assert!((u - DMatrix::identity(32, 32)).camax() < 1e-12);
}

#[test]
fn g_state_holds_square_root_weights() {
    let be = encoding();
    let g = be.g_state();
    assert!((g.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-14);
    let mut w: Vec<f64> = g[..5].iter().map(|x| x * x * 1.8).collect();
    w.sort_by(f64::total_cmp);
    for (a, b) in w.iter().zip([0.15, 0.25, 0.3, 0.4, 0.7]) {
        assert!((a - b).abs() < 1e-14);
    }
    assert!(g[5..].iter().all(|&x| x == 0.0));
}

#[test]
fn qubitized_chebyshev_matches_dense_recurrence() {
    let be = encoding();
    let h = dense(&example()) / Complex64::new(be.lambda(), 0.0);
    let psi = StateVector::system(vec![
        Complex64::new(0.6, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.8),
        Complex64::new(0.0, 0.0),
    ])
    .unwrap();
    let v0 = DVector::from_column_slice(psi.amplitudes());
    let (mut prev, mut cur) = (v0.clone(), &h * &v0);
    for n in 2..=9 {
        let next = &h * &cur * Complex64::new(2.0, 0.0) - &prev;
        prev = cur;
        cur = next;
        for route in [ChebyshevRoute::Qubitized, ChebyshevRoute::Recurrence] {
            let got = chebyshev_apply(&be, &psi, n, route).unwrap();
            let diff = (DVector::from_column_slice(got.amplitudes()) - &cur).camax();
            assert!(diff < 1e-12, "n={n} {route:?}: {diff}");
        }
    }
}

#[test]
fn iterate_preserves_norm() {
    let be = encoding();
    let psi = StateVector::basis(2, 0, 1).unwrap();
    let mut st = be.embed(&psi).unwrap();
    for _ in 0..20 {
        be.iterate(&mut st).unwrap();
    }
    assert!((st.norm() - 1.0).abs() < 1e-12);
}
