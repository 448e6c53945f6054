use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::rdm::{
    measure_rdms, one_body_elements, one_body_orbit, two_body_elements, two_body_orbit, RdmPair,
    RdmSource,
};
use crate::error::{Error, Result};
use crate::ingest::{CoordinateDerivative, Estimator, IntegralDerivatives, RunConfig, Shots};
use crate::krylov::{direct_energy_derivative, KrylovProblem};
use crate::operators::{integral_operator, MolecularHamiltonian};
use crate::qsp::{prepare_krylov_state, PhaseCache, QspProgram, TargetPolynomial};

/// Ensemble mean and unbiased variance per coordinate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub realizations: usize,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    /// Sum of `variance` over coordinates.
    pub total_variance: f64,
}

/// Nuclear gradient per coordinate with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradientResult {
    pub method: Estimator,
    pub labels: Vec<String>,
    pub values: Vec<f64>,
    /// Analytic variances propagated from the RDM elements, divided by the
    /// shot count when one is given.
    pub variances: Vec<f64>,
    pub energy: Option<f64>,
    pub eta: Option<f64>,
    pub kappa: Option<f64>,
    pub p_success: Option<f64>,
    pub ensemble: Option<EnsembleStats>,
}

fn check_shapes(rdm: &RdmPair, derivs: &IntegralDerivatives) -> Result<()> {
    if derivs.n_orbitals != rdm.n_orbitals {
        return Err(Error::Invalid(format!(
            "RDMs cover {} orbitals, derivatives {}",
            rdm.n_orbitals, derivs.n_orbitals
        )));
    }
    Ok(())
}

fn contract(rdm: &RdmPair, d: &CoordinateDerivative) -> f64 {
    let n = rdm.n_orbitals;
    let one: f64 = rdm.gamma.iter().zip(d.dk.iter()).map(|(a, b)| a * b).sum();
    let two: f64 = rdm
        .two_rdm
        .data()
        .iter()
        .zip(d.dg.data())
        .map(|(a, b)| a * b)
        .sum();
    debug_assert_eq!(rdm.two_rdm.n(), n);
    one + 0.5 * two + d.de_nuc
}

/// `Var = Σ_u var_u (Σ_{orbit(u)} ∂g/∂element)²` over unique elements.
fn propagate(rdm: &RdmPair, d: &CoordinateDerivative) -> f64 {
    let n = rdm.n_orbitals;
    let mut var = 0.0;
    for (p, q) in one_body_elements(n) {
        let w: f64 = one_body_orbit(p, q)
            .iter()
            .map(|&(a, b)| d.dk[(a, b)])
            .sum();
        var += rdm.gamma_variance[(p, q)] * w * w;
    }
    for e in two_body_elements(n) {
        let w: f64 = two_body_orbit(e)
            .iter()
            .map(|&[p, q, r, s]| 0.5 * d.dg.get(p, q, r, s))
            .sum();
        let [p, q, r, s] = e;
        var += rdm.two_rdm_variance.get(p, q, r, s) * w * w;
    }
    var
}

/// `dE/dx = Σ γ_pq dk_pq/dx + ½ Σ Γ_pqrs dg_pqrs/dx + dE_nuc/dx` per coordinate.
pub fn nuclear_gradient(rdm: &RdmPair, derivs: &IntegralDerivatives) -> Result<GradientResult> {
    check_shapes(rdm, derivs)?;
    Ok(GradientResult {
        method: rdm.estimator,
        labels: derivs.coordinates.iter().map(|c| c.label.clone()).collect(),
        values: derivs
            .coordinates
            .iter()
            .map(|d| contract(rdm, d))
            .collect(),
        variances: derivs
            .coordinates
            .iter()
            .map(|d| propagate(rdm, d))
            .collect(),
        energy: None,
        eta: None,
        kappa: None,
        p_success: None,
        ensemble: None,
    })
}

/// One Gaussian realization: every unique element drawn from
/// `N(value, variance/shots)` and mirrored onto its orbit.
pub fn sample_rdms(rdm: &RdmPair, shots: u64, rng: &mut ChaCha8Rng) -> RdmPair {
    let n = rdm.n_orbitals;
    let mut out = rdm.clone();
    let draw = |v: f64, var: f64, rng: &mut ChaCha8Rng| -> f64 {
        if var <= 0.0 {
            return v;
        }
        let z: f64 = StandardNormal.sample(rng);
        v + z * (var / shots as f64).sqrt()
    };
    for (p, q) in one_body_elements(n) {
        let v = draw(rdm.gamma[(p, q)], rdm.gamma_variance[(p, q)], rng);
        for (a, b) in one_body_orbit(p, q) {
            out.gamma[(a, b)] = v;
        }
    }
    for e in two_body_elements(n) {
        let [p, q, r, s] = e;
        let v = draw(
            rdm.two_rdm.get(p, q, r, s),
            rdm.two_rdm_variance.get(p, q, r, s),
            rng,
        );
        for [a, b, c, d] in two_body_orbit(e) {
            out.two_rdm.set(a, b, c, d, v);
        }
    }
    out
}

/// Gradients of `ensemble` sampled RDM pairs; realization `i` is seeded with `seed ⊕ i`.
pub fn ensemble_gradient(
    rdm: &RdmPair,
    derivs: &IntegralDerivatives,
    shots: u64,
    ensemble: usize,
    seed: u64,
) -> Result<EnsembleStats> {
    check_shapes(rdm, derivs)?;
    if ensemble == 0 || shots == 0 {
        return Err(Error::Invalid(
            "ensemble and shot count must be positive".into(),
        ));
    }
    let k = derivs.coordinates.len();
    let samples: Vec<Vec<f64>> = (0..ensemble)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i as u64);
            let r = sample_rdms(rdm, shots, &mut rng);
            derivs.coordinates.iter().map(|d| contract(&r, d)).collect()
        })
        .collect();
    let m = ensemble as f64;
    let mean: Vec<f64> = (0..k)
        .map(|c| samples.iter().map(|s| s[c]).sum::<f64>() / m)
        .collect();
    // shifted by the first sample, so identical samples give exactly zero
    let variance: Vec<f64> = (0..k)
        .map(|c| {
            if ensemble < 2 {
                return 0.0;
            }
            let d: Vec<f64> = samples.iter().map(|s| s[c] - samples[0][c]).collect();
            let sum: f64 = d.iter().sum();
            let sq: f64 = d.iter().map(|x| x * x).sum();
            ((sq - sum * sum / m) / (m - 1.0)).max(0.0)
        })
        .collect();
    let total_variance = variance.iter().sum();
    Ok(EnsembleStats {
        realizations: ensemble,
        mean,
        variance,
        total_variance,
    })
}

/// Krylov state, RDMs and QSP normalization for one run.
#[derive(Clone, Debug)]
pub struct RdmRun {
    pub rdm: RdmPair,
    pub energy: f64,
    pub eta: f64,
    pub kappa: f64,
    pub p_success: f64,
}

/// Solves the Krylov problem at `cfg.dim`, `cfg.threshold` and measures the
/// RDMs of state `cfg.state` with `cfg.estimator` (`Direct` measures none).
pub fn krylov_rdms(
    problem: &KrylovProblem,
    n_orbitals: usize,
    cfg: &RunConfig,
    cache: Option<&mut PhaseCache>,
) -> Result<RdmRun> {
    let (state, estimator) = (cfg.state, cfg.estimator);
    let (_, sol) = problem.solve(cfg.dim, cfg.threshold)?;
    if state >= sol.rank {
        return Err(Error::StateNotRetained {
            index: state,
            rank: sol.rank,
        });
    }
    let c = &sol.coefficients[state];
    let energy = problem.physical_energy(sol.energies[state]);
    let target = TargetPolynomial::new(c.as_slice())?;
    match estimator {
        Estimator::Exact => {
            let psi = problem.krylov_state(c)?;
            let rdm = measure_rdms(RdmSource::Exact(&psi), n_orbitals)?;
            let scale = target.eta * target.kappa;
            Ok(RdmRun {
                rdm,
                energy,
                eta: target.eta,
                kappa: target.kappa,
                p_success: 1.0 / (scale * scale),
            })
        }
        Estimator::PostSelection | Estimator::Coherent => {
            let program = QspProgram::build(target, cache)?;
            let prep = prepare_krylov_state(problem.block_encoding(), problem.psi0(), &program)?;
            let source = if estimator == Estimator::Coherent {
                RdmSource::Coherent(&prep)
            } else {
                RdmSource::PostSelection {
                    prep: &prep,
                    floor: cfg.success_floor,
                }
            };
            let rdm = measure_rdms(source, n_orbitals)?;
            Ok(RdmRun {
                rdm,
                energy,
                eta: prep.eta,
                kappa: prep.kappa,
                p_success: prep.success_probability(),
            })
        }
        Estimator::Direct => Err(Error::Invalid(
            "the direct route does not measure RDMs".into(),
        )),
    }
}

/// Gradient of the configured Krylov state by the configured estimator.
///
/// RDM estimators use Hellmann–Feynman, exact when the Krylov space contains
/// the eigenstate; `Direct` differentiates the Krylov matrices instead.
pub fn compute_gradient(
    mol: &MolecularHamiltonian,
    derivs: &IntegralDerivatives,
    cfg: &RunConfig,
    cache: Option<&mut PhaseCache>,
) -> Result<GradientResult> {
    if derivs.n_orbitals != mol.n_orbitals() {
        return Err(Error::Invalid(format!(
            "derivatives cover {} orbitals, Hamiltonian {}",
            derivs.n_orbitals,
            mol.n_orbitals()
        )));
    }
    let problem = KrylovProblem::from_molecule(mol)?;
    if cfg.estimator == Estimator::Direct {
        let mut values = Vec::with_capacity(derivs.coordinates.len());
        let mut energy = None;
        for d in &derivs.coordinates {
            let v = integral_operator(d.de_nuc, &d.dk, &d.dg)?;
            let r = direct_energy_derivative(&problem, &v, cfg.dim, cfg.threshold, cfg.state)?;
            energy = Some(r.energy);
            values.push(r.value);
        }
        if energy.is_none() {
            let (_, sol) = problem.solve(cfg.dim, cfg.threshold)?;
            energy = sol
                .energies
                .get(cfg.state)
                .map(|&e| problem.physical_energy(e));
        }
        return Ok(GradientResult {
            method: Estimator::Direct,
            labels: derivs.coordinates.iter().map(|c| c.label.clone()).collect(),
            variances: vec![0.0; values.len()],
            values,
            energy,
            eta: None,
            kappa: None,
            p_success: None,
            ensemble: None,
        });
    }
    let run = krylov_rdms(&problem, mol.n_orbitals(), cfg, cache)?;
    let mut result = nuclear_gradient(&run.rdm, derivs)?;
    result.energy = Some(run.energy);
    result.eta = Some(run.eta);
    result.kappa = Some(run.kappa);
    result.p_success = Some(run.p_success);
    if let Shots::Count(m) = cfg.shots {
        for v in &mut result.variances {
            *v /= m as f64;
        }
        if cfg.estimator != Estimator::Exact {
            result.ensemble = Some(ensemble_gradient(
                &run.rdm,
                derivs,
                m,
                cfg.ensemble,
                cfg.seed,
            )?);
        }
    }
    Ok(result)
}
