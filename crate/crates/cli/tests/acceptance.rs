//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use krylovgrad::gradients::{
    compute_gradient, excitation_operator, hermitian_parts, measure_rdms, pauli_stats,
    rdm_element_coherent, rdm_element_postselect, variance_benchmark, BenchmarkRow, RdmSource,
};
use krylovgrad::ingest::{
    parse_derivatives, parse_fcidump, Estimator, IntegralDerivatives, RunConfig,
};
use krylovgrad::krylov::{
    count_distinct_measurements, direct_energy_derivative, KrylovBasis, KrylovProblem,
    MeasurementMode,
};
use krylovgrad::operators::{MolecularHamiltonian, PauliSum, PauliTerm};
use krylovgrad::qsp::{
    fit_phases, prepare_krylov_state, qsp_unitary_scalar, PreparedState, QspProgram,
    TargetPolynomial,
};
use krylovgrad::simulator::StateVector;
use krylovgrad::Complex64;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

fn data(name: &str) -> PathBuf {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let local = root.join("tests/data").join(name);
    if local.exists() {
        local
    } else {
        root.join("../core/data").join(name)
    }
}

fn load(name: &str) -> MolecularHamiltonian {
    parse_fcidump(&std::fs::read_to_string(data(name)).unwrap()).unwrap()
}

fn load_derivs(name: &str, n: usize) -> IntegralDerivatives {
    parse_derivatives(&std::fs::read_to_string(data(name)).unwrap(), n).unwrap()
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn dense(op: &PauliSum) -> DMatrix<Complex64> {
    let d = 1 << op.n_qubits();
    let mut m = DMatrix::zeros(d, d);
    for (c, t) in op.terms() {
        m += t.to_dense() * c;
    }
    m
}

/// Lowest eigenvalue of the dense Hamiltonian restricted to the particle
/// number and spin projection of `reference`, qubit `2p` α and `2p+1` β.
fn oracle_ground(op: &PauliSum, reference: u64) -> f64 {
    let n = op.n_qubits();
    let sig = |b: u64| {
        (
            b.count_ones(),
            (0..n).step_by(2).filter(|q| b >> q & 1 == 1).count(),
        )
    };
    let idx: Vec<usize> = (0..1u64 << n)
        .filter(|&b| sig(b) == sig(reference))
        .map(|b| b as usize)
        .collect();
    let h = dense(op);
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| h[(idx[i], idx[j])]);
    let re = sub.map(|z| z.re);
    SymmetricEigen::new(re).eigenvalues.min()
}

/// `Σ c_i T_i(A)|ψ₀⟩` with `A = (Ĥ − shift)/λ`, by dense recurrence.
fn oracle_krylov_state(problem: &KrylovProblem, c: &[f64]) -> DVector<Complex64> {
    let d = 1 << problem.hamiltonian().n_qubits();
    let a = (dense(problem.hamiltonian())
        - DMatrix::identity(d, d) * Complex64::new(problem.shift(), 0.0))
        / Complex64::new(problem.lambda(), 0.0);
    let psi = DVector::from_column_slice(problem.psi0().amplitudes());
    let (mut prev, mut cur) = (psi.clone(), &a * &psi);
    let mut out = &psi * Complex64::new(c[0], 0.0);
    for (i, &ci) in c.iter().enumerate().skip(1) {
        if i > 1 {
            let next = &a * &cur * Complex64::new(2.0, 0.0) - &prev;
            prev = cur;
            cur = next;
        }
        out += &cur * Complex64::new(ci, 0.0);
    }
    out
}

fn prepare(problem: &KrylovProblem, c: &[f64]) -> Result<PreparedState, String> {
    let program = QspProgram::build(TargetPolynomial::new(c).map_err(e)?, None).map_err(e)?;
    prepare_krylov_state(problem.block_encoding(), problem.psi0(), &program).map_err(e)
}

fn ground_coefficients(
    problem: &KrylovProblem,
    dim: usize,
    s: f64,
) -> Result<(Vec<f64>, f64), String> {
    let (_, sol) = problem.solve(dim, s).map_err(e)?;
    Ok((
        sol.coefficients[0].as_slice().to_vec(),
        problem.physical_energy(sol.energies[0]),
    ))
}

fn within(start: Instant, limit: Duration) -> (bool, String) {
    let t = start.elapsed();
    (
        t < limit,
        format!("{:.2}s of {}s", t.as_secs_f64(), limit.as_secs()),
    )
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mol = load("h2_sto3g.fcidump");
    let problem = KrylovProblem::from_molecule(&mol).map_err(e)?;
    let exact = oracle_ground(problem.hamiltonian(), mol.reference_state());
    // N = 2, 2S_z = 0 in four spin orbitals
    let dim = 4;
    let (_, energy) = ground_coefficients(&problem, dim, 0.0)?;
    let err = (energy - exact).abs();
    let (fast, t) = within(start, Duration::from_secs(5));
    Ok((
        err <= 1e-9 && fast,
        format!("D={dim} s=0 |E0-E_exact|={err:.2e}, {t}"),
    ))
}

fn criterion_2() -> Outcome {
    let problem = KrylovProblem::from_molecule(&load("h2o_cas44.fcidump"))
        .map_err(e)?
        .with_basis(KrylovBasis::Monomial);
    let mut hankel = true;
    for dim in 1..=10 {
        let m = problem.matrices(dim).map_err(e)?;
        for i in 0..dim {
            for j in 0..dim {
                let k = i + j;
                // every entry on an anti-diagonal equals the first one on it
                let (i0, j0) = (k.min(dim - 1), k - k.min(dim - 1));
                hankel &= m.s[(i, j)] == m.s[(i0, j0)] && m.h[(i, j)] == m.h[(i0, j0)];
                if j + 1 < dim {
                    hankel &= m.h[(i, j)] == m.s[(i, j + 1)];
                }
            }
        }
    }
    let mut counts = true;
    let mut quad = Vec::new();
    for dim in 1..=10 {
        let distinct: BTreeSet<usize> = (0..dim)
            .flat_map(|i| (0..dim).flat_map(move |j| [i + j, i + j + 1]))
            .collect();
        counts &= count_distinct_measurements(dim, MeasurementMode::Energy) == distinct.len() - 1;
        counts &= distinct.len() - 1 == 2 * dim - 1;
        // ⟨ψ₀|H^a V H^b|ψ₀⟩ feeding the derivative moments dm_1..dm_{2D-1}
        let pairs = (1..2 * dim).flat_map(|n| (0..n).map(move |a| (a, n - 1 - a)));
        let enumerated: BTreeSet<(usize, usize)> = pairs.collect();
        let reported = count_distinct_measurements(dim, MeasurementMode::DirectGradient);
        counts &= reported == enumerated.len();
        quad.push(reported as i64);
    }
    let second: BTreeSet<i64> = quad.windows(3).map(|w| w[2] - 2 * w[1] + w[0]).collect();
    let quadratic = second.len() == 1 && second.iter().all(|&d| d > 0);
    Ok((
        hankel && counts && quadratic,
        format!("hankel={hankel}, energy counts 2D-1 and enumerated gradient counts match={counts}, gradient counts {quad:?}"),
    ))
}

fn random_lcu(n: usize, terms: usize, rng: &mut ChaCha8Rng) -> PauliSum {
    const LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];
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

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for seed in 1..=5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h0 = random_lcu(3, 10, &mut rng);
        let v = random_lcu(3, 6, &mut rng);
        let amps: Vec<Complex64> = (0..8)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
            .collect();
        let mut psi0 = StateVector::system(amps).map_err(e)?;
        psi0.normalize().map_err(e)?;
        let energy = |theta: f64, dim: usize| -> Result<f64, String> {
            let h = h0
                .add(&v.clone().scale(Complex64::new(theta, 0.0)))
                .map_err(e)?;
            let p = KrylovProblem::new(&h, psi0.clone()).map_err(e)?;
            Ok(ground_coefficients(&p, dim, 0.0)?.1)
        };
        let problem = KrylovProblem::new(&h0, psi0.clone()).map_err(e)?;
        let h = 1e-5;
        for dim in 2..=4 {
            let d = direct_energy_derivative(&problem, &v, dim, 0.0, 0)
                .map_err(e)?
                .value;
            let fd = (energy(h, dim)? - energy(-h, dim)?) / (2.0 * h);
            worst = worst.max((d - fd).abs());
        }
    }
    let (fast, t) = within(start, Duration::from_secs(30));
    Ok((
        worst <= 1e-6 && fast,
        format!("5 random 3-qubit LCUs, D=2..4: max |direct-fd|={worst:.2e}, {t}"),
    ))
}

fn cheb(c: &[f64], x: f64) -> f64 {
    c.iter()
        .enumerate()
        .map(|(k, ck)| ck * (k as f64 * x.acos()).cos())
        .sum()
}

/// `max |f|` on `[-1, 1]`: a uniform-angle scan, then golden-section search
/// on the bracket around each local maximum.
fn sup_norm(c: &[f64]) -> f64 {
    let n = 4000;
    let xs: Vec<f64> = (0..=n)
        .map(|i| (i as f64 * std::f64::consts::PI / n as f64).cos())
        .collect();
    let f = |x: f64| cheb(c, x).abs();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best = vals.iter().copied().fold(0.0, f64::max);
    for i in 1..n {
        if vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] {
            let (mut a, mut b) = (xs[i + 1], xs[i - 1]);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..100 {
                let (x1, x2) = (b - g * (b - a), a + g * (b - a));
                if f(x1) > f(x2) {
                    b = x2;
                } else {
                    a = x1;
                }
            }
            best = best.max(f(0.5 * (a + b)));
        }
    }
    best
}

/// Random definite-parity Chebyshev series of degree `d` scaled to supremum `top`.
fn random_target(d: usize, top: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut c: Vec<f64> = (0..=d)
        .map(|k| {
            if (d - k) % 2 == 0 {
                rng.random_range(-1.0..1.0)
            } else {
                0.0
            }
        })
        .collect();
    // keep the leading coefficient away from zero so the degree is exact
    c[d] = rng.random_range(0.3..1.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let sup = sup_norm(&c);
    c.iter().map(|v| v * top / sup).collect()
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut block_err = 0.0f64;
    let mut problems = 0;
    let cases: [(&str, &[usize], &[f64]); 3] = [
        ("h2_sto3g.fcidump", &[1, 2], &[0.0]),
        ("theta.fcidump", &[1, 2, 3], &[0.0]),
        (
            "h2o_cas44.fcidump",
            &[1, 2, 3, 4, 5, 6, 7, 8],
            &[1e-2, 1e-3, 1e-8],
        ),
    ];
    for (file, dims, thresholds) in cases {
        let problem = KrylovProblem::from_molecule(&load(file)).map_err(e)?;
        for &s in thresholds {
            for &dim in dims {
                let (c, _) = ground_coefficients(&problem, dim, s)?;
                let prep = prepare(&problem, &c)?;
                let want =
                    oracle_krylov_state(&problem, &c) / Complex64::new(prep.amplitude_scale(), 0.0);
                for (a, b) in prep.zero_block().iter().zip(want.iter()) {
                    block_err = block_err.max((a - b).norm());
                }
                problems += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut fit_err = 0.0f64;
    let mut fits = 0;
    for d in 0..=12 {
        for top in [0.5, 0.9, 1.0] {
            for _ in 0..3 {
                let c = random_target(d, top, &mut rng);
                let phases = fit_phases(&c).map_err(|x| format!("degree {d}: {x}"))?;
                for _ in 0..500 {
                    let x: f64 = rng.random_range(-1.0..1.0);
                    let want = cheb(&c, x);
                    let got = qsp_unitary_scalar(&phases, x).map_err(e)?[(0, 0)].re;
                    fit_err = fit_err.max((got - want).abs());
                }
                fits += 1;
            }
        }
    }
    let (fast, t) = within(start, Duration::from_secs(120));
    Ok((
        block_err <= 1e-8 && fit_err <= 1e-7 && fast,
        format!(
            "{problems} prepared states: max |zero block - p(H)psi0/(eta kappa)|={block_err:.2e}; \
             {fits} fits of degree <= 12: max off-grid error {fit_err:.2e}; {t}"
        ),
    ))
}

fn rdm_observables(n: usize) -> Result<Vec<PauliSum>, String> {
    let mut out = Vec::new();
    for p in 0..n {
        for q in 0..n {
            let epq = excitation_operator(p, q, n).map_err(e)?;
            let (re, im) = hermitian_parts(&epq).map_err(e)?;
            out.extend([re, im]);
            for r in 0..n {
                for s in 0..n {
                    let prod = epq
                        .mul(&excitation_operator(r, s, n).map_err(e)?)
                        .map_err(e)?;
                    let (re, im) = hermitian_parts(&prod).map_err(e)?;
                    out.extend([re, im]);
                }
            }
        }
    }
    Ok(out)
}

fn criterion_5() -> Outcome {
    let problem = KrylovProblem::from_molecule(&load("theta.fcidump")).map_err(e)?;
    let (c, _) = ground_coefficients(&problem, 3, 0.0)?;
    let prep = prepare(&problem, &c)?;
    let psi = oracle_krylov_state(&problem, &c);
    let a2 = prep.amplitude_scale().powi(2);
    let mut strings = std::collections::BTreeMap::new();
    for op in rdm_observables(2)? {
        for (_, t) in op.terms() {
            strings.insert((t.x_mask(), t.z_mask()), t);
        }
    }
    let mut worst = 0.0f64;
    for term in strings.values() {
        let st = pauli_stats(&prep, term);
        let exact = psi.dotc(&(term.to_dense() * &psi)).re;
        worst = worst.max((a2 * (st.full + st.reflected) - 2.0 * exact).abs());
    }
    let post = measure_rdms(
        RdmSource::PostSelection {
            prep: &prep,
            floor: 0.0,
        },
        2,
    )
    .map_err(e)?;
    let coh = measure_rdms(RdmSource::Coherent(&prep), 2).map_err(e)?;
    let mut gap = (&post.gamma - &coh.gamma).amax();
    for (a, b) in post.two_rdm.data().iter().zip(coh.two_rdm.data()) {
        gap = gap.max((a - b).abs());
    }
    Ok((
        worst <= 1e-9 && gap <= 1e-9,
        format!(
            "{} Pauli strings: max identity error {worst:.2e}; coherent vs post RDMs {gap:.2e}",
            strings.len()
        ),
    ))
}

fn criterion_6() -> Outcome {
    let mol = load("theta.fcidump");
    let derivs = load_derivs("theta.derivs", 2);
    let mut cfg = RunConfig {
        dim: 3,
        threshold: 0.0,
        ..RunConfig::default()
    };
    let mut route = |est| -> Result<f64, String> {
        cfg.estimator = est;
        Ok(compute_gradient(&mol, &derivs, &cfg, None)
            .map_err(e)?
            .values[0])
    };
    let direct = route(Estimator::Direct)?;
    let rdm: Vec<f64> = [
        Estimator::Exact,
        Estimator::PostSelection,
        Estimator::Coherent,
    ]
    .into_iter()
    .map(&mut route)
    .collect::<Result<_, _>>()?;
    let d = &derivs.coordinates[0];
    let energy = |theta: f64| -> Result<f64, String> {
        let p =
            KrylovProblem::from_molecule(&mol.displaced(theta, d.de_nuc, &d.dh, &d.dg).map_err(e)?)
                .map_err(e)?;
        Ok(ground_coefficients(&p, 3, 0.0)?.1)
    };
    let h = 1e-5;
    let fd = (energy(h)? - energy(-h)?) / (2.0 * h);
    let vs_direct = rdm.iter().map(|v| (v - direct).abs()).fold(0.0, f64::max);
    let vs_fd = rdm.iter().map(|v| (v - fd).abs()).fold(0.0, f64::max);
    Ok((
        vs_direct <= 1e-7 && vs_fd <= 1e-6,
        format!("exact/post/coherent RDM routes: max |rdm-direct|={vs_direct:.2e}, max |rdm-fd|={vs_fd:.2e}"),
    ))
}

fn column(
    rows: &[BenchmarkRow],
    s: f64,
    est: Estimator,
    f: impl Fn(&BenchmarkRow) -> f64,
) -> Vec<f64> {
    rows.iter()
        .filter(|r| r.threshold == s && r.estimator == est)
        .map(f)
        .collect()
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mol = load("h2o_cas44.fcidump");
    let derivs = load_derivs("h2o_cas44.derivs", 4);
    let thresholds = [1e-2, 1e-3, 1e-8];
    let cfg = RunConfig {
        sweep_dims: (1..=8).collect(),
        sweep_thresholds: thresholds.to_vec(),
        ensemble: 100,
        seed: 0,
        ..RunConfig::default()
    };
    let rows = variance_benchmark(&mol, &derivs, &cfg, None).map_err(e)?;
    let post = column(&rows, 1e-3, Estimator::PostSelection, |r| r.total_variance);
    let coh = column(&rows, 1e-3, Estimator::Coherent, |r| r.total_variance);
    let ordered = post.iter().zip(&coh).all(|(p, c)| c <= p);
    let ratios: Vec<f64> = post.iter().zip(&coh).map(|(p, c)| p / c).collect();
    let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let ratio_ok = (1.2..=3.5).contains(&mean_ratio);

    let mut eta_ok = true;
    let mut delta_ok = true;
    let mut detail = Vec::new();
    for s in thresholds {
        let eta = column(&rows, s, Estimator::Coherent, |r| r.eta);
        let delta = column(&rows, s, Estimator::Coherent, |r| r.delta);
        let down = eta.windows(2).filter(|w| w[1] <= w[0]).count();
        let frac = down as f64 / (eta.len() - 1) as f64;
        eta_ok &= frac >= 0.8;
        let rising: Vec<usize> = (1..delta.len())
            .filter(|&i| delta[i] > delta[i - 1])
            .map(|i| i + 1)
            .collect();
        delta_ok &= rising.is_empty();
        detail.push(format!(
            "s={s:e}: eta nonincreasing on {down}/{} pairs, delta rises at D={rising:?} (delta D=1 {:.2e}, D=8 {:.2e})",
            eta.len() - 1,
            delta[0],
            delta[delta.len() - 1]
        ));
    }
    let last = |s| {
        *column(&rows, s, Estimator::Coherent, |r| r.delta)
            .last()
            .unwrap()
    };
    let s_order = last(1e-8) <= last(1e-3) && last(1e-3) <= last(1e-2);
    let (fast, t) = within(start, Duration::from_secs(1800));
    let pass = ordered && ratio_ok && eta_ok && delta_ok && s_order && fast;
    Ok((
        pass,
        format!(
            "H2O 8 qubits D=1..8: coherent<=post at s=1e-3 {ordered}; mean post/coherent ratio {mean_ratio:.3} \
             (in [1.2,3.5] {ratio_ok}); eta trend {eta_ok}; delta decreasing {delta_ok}; \
             delta at D=8 ordered by s {s_order} ({:.2e} <= {:.2e} <= {:.2e}); {t}\n    {}",
            last(1e-8),
            last(1e-3),
            last(1e-2),
            detail.join("\n    ")
        ),
    ))
}

fn criterion_8() -> Outcome {
    let problem = KrylovProblem::from_molecule(&load("h2o_cas44.fcidump")).map_err(e)?;
    let (c, _) = ground_coefficients(&problem, 4, 1e-3)?;
    let c2: Vec<f64> = c.iter().map(|v| 2.0 * v).collect();
    let (p1, p2) = (prepare(&problem, &c)?, prepare(&problem, &c2)?);
    let eta_ratio = p2.eta / p1.eta;
    let mut worst = 0.0f64;
    let mut count = 0;
    for p in 0..4 {
        for q in p..4 {
            let (re, _) = hermitian_parts(&excitation_operator(p, q, 4).map_err(e)?).map_err(e)?;
            let (_, a1) = rdm_element_postselect(&p1, &re, 0.0).map_err(e)?;
            let (_, a2) = rdm_element_postselect(&p2, &re, 0.0).map_err(e)?;
            let (_, b1) = rdm_element_coherent(&p1, &re).map_err(e)?;
            let (_, b2) = rdm_element_coherent(&p2, &re).map_err(e)?;
            for (v1, v2) in [(a1, a2), (b1, b2)] {
                if v1 > 0.0 {
                    worst = worst.max((v2 / v1 / 16.0 - 1.0).abs());
                    count += 1;
                }
            }
        }
    }
    Ok((
        worst <= 0.01 && (eta_ratio - 2.0).abs() < 1e-9 && count > 0,
        format!(
            "eta ratio {eta_ratio:.6}; {count} gamma variances, max |ratio/16 - 1|={worst:.2e}"
        ),
    ))
}

fn criterion_9() -> Outcome {
    let args = [
        "bench-variance".to_string(),
        "--fcidump".into(),
        data("h2o_cas44.fcidump").display().to_string(),
        "--derivs".into(),
        data("h2o_cas44.derivs").display().to_string(),
        "--sweep-dim".into(),
        "1..5".into(),
        "--sweep-threshold".into(),
        "1e-3,1e-8".into(),
        "--ensemble".into(),
        "50".into(),
        "--seed".into(),
        "42".into(),
    ];
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_krylovgrad"))
            .args(&args)
            .output()
            .map_err(e)
    };
    let (a, b) = (run()?, run()?);
    let ok =
        a.status.success() && b.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
    Ok((
        ok,
        format!(
            "two runs, {} bytes each, identical {}",
            a.stdout.len(),
            a.stdout == b.stdout
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("exactness limit", criterion_1),
        ("Hankel structure and measurement counts", criterion_2),
        ("direct derivative vs finite differences", criterion_3),
        ("QSP fidelity", criterion_4),
        ("coherent identity", criterion_5),
        ("gradient equivalence", criterion_6),
        ("variance trends", criterion_7),
        ("quartic eta law", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (pass, detail) = match run() {
            Ok(r) => r,
            Err(msg) => (false, format!("error: {msg}")),
        };
        failed += usize::from(!pass);
        println!(
            "criterion {} [{name}]: {} | {detail}",
            i + 1,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
