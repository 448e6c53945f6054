//! Invariant suite over a built-in two-orbital problem.

use krylovgrad::gradients::{
    compute_gradient, excitation_operator, hermitian_parts, measure_rdms, pauli_stats,
    variance_benchmark, RdmSource,
};
use krylovgrad::ingest::{
    parse_derivatives, parse_fcidump, Estimator, IntegralDerivatives, RunConfig,
};
use krylovgrad::krylov::{
    count_distinct_measurements, direct_energy_derivative, KrylovBasis, KrylovProblem,
    MeasurementMode,
};
use krylovgrad::operators::{integral_operator, MolecularHamiltonian, PauliSum};
use krylovgrad::qsp::{prepare_krylov_state, QspProgram, TargetPolynomial};
use krylovgrad::simulator::{sector_basis, sector_ground_state};
use krylovgrad::Result;

/// Minimal-basis H2 with an off-diagonal perturbation so that the Krylov
/// space from the reference has dimension three.
const FCIDUMP: &str = "\
 &FCI NORB=2,NELEC=2,MS2=0,
 &END
 0.6745940843233693  1 1 1 1
 0.1812579147931083  2 1 2 1
 0.6635639912205478  2 2 1 1
 0.6974953466801821  2 2 2 2
 0.03                2 1 1 1
 -1.252797061835817  1 1 0 0
 0.07                2 1 0 0
 -0.4756022993742506 2 2 0 0
 0.7142857142857143  0 0 0 0
";

const DERIVS: &str = "\
coord theta
E 0.25
K 0 0 -0.3
K 1 0 0.12
K 1 1 0.2
G 0 0 0 0 0.1
G 1 0 1 0 -0.05
G 1 1 0 0 0.07
G 1 1 1 0 0.04
G 1 1 1 1 -0.15
";

fn problem_data() -> Result<(MolecularHamiltonian, IntegralDerivatives)> {
    let mol = parse_fcidump(FCIDUMP)?;
    let derivs = parse_derivatives(DERIVS, 2)?;
    Ok((mol, derivs))
}

type Check = fn(&MolecularHamiltonian, &IntegralDerivatives) -> Result<(bool, String)>;

fn exact_limit(mol: &MolecularHamiltonian, _: &IntegralDerivatives) -> Result<(bool, String)> {
    let problem = KrylovProblem::from_molecule(mol)?;
    let dim = sector_basis(problem.hamiltonian().n_qubits(), mol.reference_state()).len();
    let (exact, _) = sector_ground_state(problem.hamiltonian(), mol.reference_state())?;
    let (_, sol) = problem.solve(dim, 0.0)?;
    let err = (problem.physical_energy(sol.energies[0]) - exact).abs();
    Ok((err <= 1e-9, format!("D={dim} |E0-exact|={err:.2e}")))
}

fn hankel(mol: &MolecularHamiltonian, _: &IntegralDerivatives) -> Result<(bool, String)> {
    let problem = KrylovProblem::from_molecule(mol)?.with_basis(KrylovBasis::Monomial);
    let mut worst = 0.0f64;
    for dim in 1..=10 {
        let m = problem.matrices(dim)?;
        for i in 0..dim {
            for j in 0..dim {
                if i + 1 < dim && j > 0 {
                    worst = worst.max((m.s[(i, j)] - m.s[(i + 1, j - 1)]).abs());
                    worst = worst.max((m.h[(i, j)] - m.h[(i + 1, j - 1)]).abs());
                }
                if j + 1 < dim {
                    worst = worst.max((m.h[(i, j)] - m.s[(i, j + 1)]).abs());
                }
            }
        }
    }
    let counts =
        (1..=10).all(|d| count_distinct_measurements(d, MeasurementMode::Energy) == 2 * d - 1);
    Ok((
        worst == 0.0 && counts,
        format!("max anti-diagonal deviation {worst:.2e}"),
    ))
}

fn direct_derivative(
    mol: &MolecularHamiltonian,
    derivs: &IntegralDerivatives,
) -> Result<(bool, String)> {
    let d = &derivs.coordinates[0];
    let v = integral_operator(d.de_nuc, &d.dk, &d.dg)?;
    let problem = KrylovProblem::from_molecule(mol)?;
    let energy = |theta: f64, dim: usize| -> Result<f64> {
        let p = KrylovProblem::from_molecule(&mol.displaced(theta, d.de_nuc, &d.dh, &d.dg)?)?;
        let (_, sol) = p.solve(dim, 0.0)?;
        Ok(p.physical_energy(sol.energies[0]))
    };
    let h = 1e-5;
    let mut worst = 0.0f64;
    for dim in 2..=3 {
        let direct = direct_energy_derivative(&problem, &v, dim, 0.0, 0)?.value;
        let fd = (energy(h, dim)? - energy(-h, dim)?) / (2.0 * h);
        worst = worst.max((direct - fd).abs());
    }
    Ok((worst <= 1e-6, format!("max |direct-fd|={worst:.2e}")))
}

fn qsp_block(mol: &MolecularHamiltonian, _: &IntegralDerivatives) -> Result<(bool, String)> {
    let problem = KrylovProblem::from_molecule(mol)?;
    let mut worst = 0.0f64;
    for dim in 1..=3 {
        let (_, sol) = problem.solve(dim, 0.0)?;
        let c = &sol.coefficients[0];
        let program = QspProgram::build(TargetPolynomial::new(c.as_slice())?, None)?;
        let prep = prepare_krylov_state(problem.block_encoding(), problem.psi0(), &program)?;
        let psi = problem.krylov_state(c)?;
        let scale = prep.amplitude_scale();
        for (a, b) in prep.zero_block().iter().zip(psi.amplitudes()) {
            worst = worst.max((a - b / scale).norm());
        }
    }
    Ok((
        worst <= 1e-8,
        format!("max zero-block deviation {worst:.2e}"),
    ))
}

fn rdm_observables(n: usize) -> Result<Vec<PauliSum>> {
    let mut out = Vec::new();
    for p in 0..n {
        for q in 0..n {
            let epq = excitation_operator(p, q, n)?;
            let (re, im) = hermitian_parts(&epq)?;
            out.extend([re, im]);
            for r in 0..n {
                for s in 0..n {
                    let (re, im) = hermitian_parts(&epq.mul(&excitation_operator(r, s, n)?)?)?;
                    out.extend([re, im]);
                }
            }
        }
    }
    Ok(out)
}

fn coherent_identity(
    mol: &MolecularHamiltonian,
    _: &IntegralDerivatives,
) -> Result<(bool, String)> {
    let problem = KrylovProblem::from_molecule(mol)?;
    let (_, sol) = problem.solve(3, 0.0)?;
    let c = &sol.coefficients[0];
    let psi = problem.krylov_state(c)?;
    let program = QspProgram::build(TargetPolynomial::new(c.as_slice())?, None)?;
    let prep = prepare_krylov_state(problem.block_encoding(), problem.psi0(), &program)?;
    let a2 = prep.amplitude_scale().powi(2);
    let mut worst = 0.0f64;
    for op in rdm_observables(mol.n_orbitals())? {
        for (_, term) in op.terms() {
            let st = pauli_stats(&prep, &term);
            let exact = term.matrix_element(psi.amplitudes(), psi.amplitudes()).re;
            worst = worst.max((a2 * (st.full + st.reflected) - 2.0 * exact).abs());
        }
    }
    let exact = measure_rdms(RdmSource::Exact(&psi), 2)?;
    let post = measure_rdms(
        RdmSource::PostSelection {
            prep: &prep,
            floor: 0.0,
        },
        2,
    )?;
    let coh = measure_rdms(RdmSource::Coherent(&prep), 2)?;
    let mut rdm_gap = 0.0f64;
    for r in [&post, &coh] {
        rdm_gap = rdm_gap.max((&r.gamma - &exact.gamma).amax());
        for (a, b) in r.two_rdm.data().iter().zip(exact.two_rdm.data()) {
            rdm_gap = rdm_gap.max((a - b).abs());
        }
    }
    Ok((
        worst <= 1e-9 && rdm_gap <= 1e-9,
        format!("identity {worst:.2e}, rdm gap {rdm_gap:.2e}"),
    ))
}

fn gradient_routes(
    mol: &MolecularHamiltonian,
    derivs: &IntegralDerivatives,
) -> Result<(bool, String)> {
    let mut cfg = RunConfig {
        dim: 3,
        threshold: 0.0,
        ..RunConfig::default()
    };
    let mut values = Vec::new();
    for est in [
        Estimator::Direct,
        Estimator::Exact,
        Estimator::PostSelection,
        Estimator::Coherent,
    ] {
        cfg.estimator = est;
        values.push(compute_gradient(mol, derivs, &cfg, None)?.values[0]);
    }
    let gap = values[1..]
        .iter()
        .map(|v| (v - values[0]).abs())
        .fold(0.0, f64::max);
    Ok((gap <= 1e-7, format!("max |rdm-direct|={gap:.2e}")))
}

fn determinism(mol: &MolecularHamiltonian, derivs: &IntegralDerivatives) -> Result<(bool, String)> {
    let cfg = RunConfig {
        sweep_dims: vec![1, 2, 3],
        ensemble: 20,
        seed: 7,
        ..RunConfig::default()
    };
    let a = variance_benchmark(mol, derivs, &cfg, None)?;
    let b = variance_benchmark(mol, derivs, &cfg, None)?;
    Ok((a == b, format!("{} rows", a.len())))
}

/// Prints one line per check and returns the number that failed.
pub fn run_checks() -> usize {
    let checks: [(&str, Check); 7] = [
        ("exact-limit", exact_limit),
        ("hankel-and-counts", hankel),
        ("direct-derivative", direct_derivative),
        ("qsp-zero-block", qsp_block),
        ("coherent-identity", coherent_identity),
        ("gradient-routes", gradient_routes),
        ("determinism", determinism),
    ];
    let (mol, derivs) = match problem_data() {
        Ok(d) => d,
        Err(e) => {
            println!("FAIL built-in problem: {e}");
            return checks.len();
        }
    };
    let mut failed = 0;
    for (name, check) in checks {
        match check(&mol, &derivs) {
            Ok((true, detail)) => println!("ok   {name}: {detail}"),
            Ok((false, detail)) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
            Err(e) => {
                failed += 1;
                println!("FAIL {name}: {e}");
            }
        }
    }
    failed
}
