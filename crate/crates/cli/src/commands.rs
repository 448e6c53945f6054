use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use krylovgrad::format::g12;
use krylovgrad::gradients::{benchmark_csv, compute_gradient, variance_benchmark};
use krylovgrad::ingest::{parse_derivatives, parse_fcidump, IntegralDerivatives, RunConfig};
use krylovgrad::krylov::{count_distinct_measurements, KrylovProblem, MeasurementMode};
use krylovgrad::operators::MolecularHamiltonian;
use krylovgrad::qsp::{PhaseCache, QspProgram, TargetPolynomial};
use krylovgrad::simulator::{sector_basis, sector_ground_state};
use krylovgrad::Error;
use serde_json::json;

/// Sectors larger than this are not diagonalized densely for the `delta` column.
const EXACT_SECTOR_CAP: usize = 2048;

pub fn load_fcidump(path: &Path) -> anyhow::Result<MolecularHamiltonian> {
    let text = crate::read(path)?;
    parse_fcidump(&text).with_context(|| format!("in {}", path.display()))
}

pub fn load_derivs(path: &Path, n_orbitals: usize) -> anyhow::Result<IntegralDerivatives> {
    let text = crate::read(path)?;
    parse_derivatives(&text, n_orbitals).with_context(|| format!("in {}", path.display()))
}

/// Runs `f` with the phase cache at `path`, loading it first and saving it after.
pub fn with_cache<T>(
    path: Option<&Path>,
    f: impl FnOnce(Option<&mut PhaseCache>) -> anyhow::Result<T>,
) -> anyhow::Result<T> {
    match path {
        None => f(None),
        Some(path) => {
            let mut cache = PhaseCache::load(path)
                .with_context(|| format!("phase cache {}", path.display()))?;
            let out = f(Some(&mut cache))?;
            cache
                .save(path)
                .with_context(|| format!("phase cache {}", path.display()))?;
            Ok(out)
        }
    }
}

/// Three CSV sections, each under a `# name` line: energies, overlap
/// eigenvalues and measurement counts, for every `(s, D)` of the sweep.
pub fn energy_report(mol: &MolecularHamiltonian, cfg: &RunConfig) -> anyhow::Result<String> {
    let problem = KrylovProblem::from_molecule(mol)?;
    let n = problem.hamiltonian().n_qubits();
    let exact = if sector_basis(n, mol.reference_state()).len() <= EXACT_SECTOR_CAP {
        Some(sector_ground_state(problem.hamiltonian(), mol.reference_state())?.0)
    } else {
        None
    };
    let mut energies = String::from("# energies\nD,s,rank,state,energy,delta\n");
    let mut spectrum = String::from("# overlap_eigenvalues\nD,s,index,value,retained\n");
    for s in cfg.thresholds() {
        for dim in cfg.dims() {
            let (_, sol) = problem.solve(dim, s)?;
            for (m, &e) in sol.energies.iter().enumerate() {
                let e = problem.physical_energy(e);
                let delta = match exact {
                    Some(x) if m == 0 => g12((e - x).abs()),
                    _ => String::new(),
                };
                let _ = writeln!(
                    energies,
                    "{dim},{},{},{m},{},{delta}",
                    g12(s),
                    sol.rank,
                    g12(e)
                );
            }
            let dropped = sol.overlap_eigenvalues.len() - sol.rank;
            for (i, &l) in sol.overlap_eigenvalues.iter().enumerate() {
                let _ = writeln!(spectrum, "{dim},{},{i},{},{}", g12(s), g12(l), i >= dropped);
            }
        }
    }
    let mut counts = String::from("# measurements\nD,energy,direct_gradient\n");
    let mut dims = cfg.dims();
    dims.sort_unstable();
    dims.dedup();
    for dim in dims {
        let _ = writeln!(
            counts,
            "{dim},{},{}",
            count_distinct_measurements(dim, MeasurementMode::Energy),
            count_distinct_measurements(dim, MeasurementMode::DirectGradient)
        );
    }
    Ok(format!("{energies}\n{spectrum}\n{counts}"))
}

pub fn gradient_json(
    mol: &MolecularHamiltonian,
    derivs: &IntegralDerivatives,
    cfg: &RunConfig,
    cache: Option<&mut PhaseCache>,
) -> anyhow::Result<String> {
    let result = compute_gradient(mol, derivs, cfg, cache)?;
    Ok(serde_json::to_string_pretty(&result)? + "\n")
}

pub fn phases_json(
    mol: &MolecularHamiltonian,
    cfg: &RunConfig,
    cache: Option<&mut PhaseCache>,
) -> anyhow::Result<String> {
    let problem = KrylovProblem::from_molecule(mol)?;
    let (_, sol) = problem.solve(cfg.dim, cfg.threshold)?;
    if cfg.state >= sol.rank {
        return Err(Error::StateNotRetained {
            index: cfg.state,
            rank: sol.rank,
        }
        .into());
    }
    let c = sol.coefficients[cfg.state].as_slice().to_vec();
    let program = QspProgram::build(TargetPolynomial::new(&c)?, cache)?;
    let parts: Vec<_> = program
        .parts
        .iter()
        .map(|p| json!({ "weight": p.weight, "shrink": p.shrink, "phases": p.phases }))
        .collect();
    let doc = json!({
        "dim": cfg.dim,
        "threshold": cfg.threshold,
        "state": cfg.state,
        "energy": problem.physical_energy(sol.energies[cfg.state]),
        "coefficients": c,
        "eta": program.eta(),
        "kappa": program.kappa(),
        "parts": parts,
    });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

pub fn bench_csv(
    mol: &MolecularHamiltonian,
    derivs: &IntegralDerivatives,
    cfg: &RunConfig,
    cache: Option<&mut PhaseCache>,
) -> anyhow::Result<String> {
    Ok(benchmark_csv(&variance_benchmark(mol, derivs, cfg, cache)?))
}
