use std::fmt::Write as _;

use super::gradient::ensemble_gradient;
use super::rdm::{measure_rdms, RdmSource};
use crate::error::Result;
use crate::format::g12;
use crate::ingest::{Estimator, IntegralDerivatives, RunConfig, Shots};
use crate::krylov::KrylovProblem;
use crate::operators::MolecularHamiltonian;
use crate::qsp::{prepare_krylov_state, PhaseCache, QspProgram, TargetPolynomial};
use crate::simulator::sector_ground_state;

pub const BENCHMARK_HEADER: &str = "D,s,estimator,total_variance,eta,delta,p_success";

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkRow {
    pub dim: usize,
    pub threshold: f64,
    pub estimator: Estimator,
    pub total_variance: f64,
    pub eta: f64,
    /// `|E₀ − E_exact|` against the exact ground state of the reference sector.
    pub delta: f64,
    pub p_success: f64,
}

pub fn benchmark_csv(rows: &[BenchmarkRow]) -> String {
    let mut out = format!("{BENCHMARK_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.dim,
            g12(r.threshold),
            r.estimator.name(),
            g12(r.total_variance),
            g12(r.eta),
            g12(r.delta),
            g12(r.p_success)
        );
    }
    out
}

/// Ensemble variance of the ground-state gradient over the `(s, D)` sweep.
///
/// For each point the Krylov ground state is prepared once and read out by
/// each estimator; per-element analytic variances seed `cfg.ensemble`
/// Gaussian realizations of the RDMs (one shot per element unless
/// `cfg.shots` gives a count). The estimator list is `cfg.estimator` when it
/// is post-selection or coherent, and both otherwise. No success floor applies.
pub fn variance_benchmark(
    mol: &MolecularHamiltonian,
    derivs: &IntegralDerivatives,
    cfg: &RunConfig,
    mut cache: Option<&mut PhaseCache>,
) -> Result<Vec<BenchmarkRow>> {
    let problem = KrylovProblem::from_molecule(mol)?;
    let (exact, _) = sector_ground_state(problem.hamiltonian(), mol.reference_state())?;
    let estimators = match cfg.estimator {
        Estimator::PostSelection | Estimator::Coherent => vec![cfg.estimator],
        _ => vec![Estimator::PostSelection, Estimator::Coherent],
    };
    let shots = match cfg.shots {
        Shots::Analytic => 1,
        Shots::Count(m) => m,
    };
    let mut rows = Vec::new();
    for s in cfg.thresholds() {
        for dim in cfg.dims() {
            let (_, sol) = problem.solve(dim, s)?;
            let c = &sol.coefficients[0];
            let delta = (problem.physical_energy(sol.energies[0]) - exact).abs();
            let target = TargetPolynomial::new(c.as_slice())?;
            let eta = target.eta;
            let program = QspProgram::build(target, cache.as_deref_mut())?;
            let prep = prepare_krylov_state(problem.block_encoding(), problem.psi0(), &program)?;
            let p_success = prep.success_probability();
            for &estimator in &estimators {
                let source = match estimator {
                    Estimator::Coherent => RdmSource::Coherent(&prep),
                    _ => RdmSource::PostSelection {
                        prep: &prep,
                        floor: 0.0,
                    },
                };
                let rdm = measure_rdms(source, mol.n_orbitals())?;
                let stats = ensemble_gradient(&rdm, derivs, shots, cfg.ensemble, cfg.seed)?;
                log::info!(
                    "D={dim} s={s:e} {}: total variance {:e}",
                    estimator.name(),
                    stats.total_variance
                );
                rows.push(BenchmarkRow {
                    dim,
                    threshold: s,
                    estimator,
                    total_variance: stats.total_variance,
                    eta,
                    delta,
                    p_success,
                });
            }
        }
    }
    Ok(rows)
}
