use nalgebra::DMatrix;
use num_complex::Complex64;

use super::phases::{fit_phases, PhaseCache, PhaseFactors};
use super::poly::{Parity, TargetPolynomial};
use crate::error::{Error, Result};
use crate::simulator::{BlockEncoding, StateVector};

/// Shrink factor applied when a part touching `|f| = 1` cannot be fitted.
const SHRINK: f64 = 1.0 - 1e-8;

/// Phases for one parity part, fitted to `shrink · p_part/‖p_part‖∞`.
#[derive(Clone, Debug)]
pub struct FittedPart {
    pub parity: Parity,
    pub phases: PhaseFactors,
    pub shrink: f64,
    /// `‖p_part‖∞ / (η · shrink)`; the part's share of `κ`.
    pub weight: f64,
}

/// A target polynomial with fitted phases for each of its parity parts.
#[derive(Clone, Debug)]
pub struct QspProgram {
    pub target: TargetPolynomial,
    pub parts: Vec<FittedPart>,
}

fn fit_with_retry(c: &[f64]) -> Result<(PhaseFactors, f64)> {
    match fit_phases(c) {
        Ok(p) => Ok((p, 1.0)),
        Err(Error::PhaseFit { .. }) => {
            let shrunk: Vec<f64> = c.iter().map(|v| v * SHRINK).collect();
            Ok((fit_phases(&shrunk)?, SHRINK))
        }
        Err(e) => Err(e),
    }
}

impl QspProgram {
    /// Fits both parity parts concurrently, reusing cached phases when present.
    pub fn build(target: TargetPolynomial, mut cache: Option<&mut PhaseCache>) -> Result<Self> {
        let cached: Vec<Option<PhaseFactors>> = target
            .parts
            .iter()
            .map(|p| {
                cache
                    .as_deref()
                    .and_then(|c| c.get(&p.coefficients).cloned())
            })
            .collect();
        let fitted: Vec<Result<(PhaseFactors, f64)>> = std::thread::scope(|scope| {
            let handles: Vec<_> = target
                .parts
                .iter()
                .zip(&cached)
                .map(|(part, hit)| {
                    // only unshrunk fits are cached
                    scope.spawn(move || match hit {
                        Some(p) => Ok((p.clone(), 1.0)),
                        None => fit_with_retry(&part.coefficients),
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("phase fitting thread panicked"))
                .collect()
        });
        let mut parts = Vec::with_capacity(fitted.len());
        for ((part, hit), result) in target.parts.iter().zip(&cached).zip(fitted) {
            let (phases, shrink) = result?;
            if hit.is_none() && shrink == 1.0 {
                if let Some(c) = cache.as_deref_mut() {
                    c.insert(&part.coefficients, phases.clone());
                }
            }
            parts.push(FittedPart {
                parity: part.parity,
                phases,
                shrink,
                weight: part.norm / shrink,
            });
        }
        Ok(QspProgram { target, parts })
    }

    pub fn eta(&self) -> f64 {
        self.target.eta
    }

    /// `Σ weight`; equals `target.kappa` unless a part was shrunk.
    pub fn kappa(&self) -> f64 {
        self.parts.iter().map(|p| p.weight).sum()
    }

    /// `η κ`: the zero-ancilla block of the prepared state is `p(H)|ψ₀⟩ / (η κ)`.
    pub fn amplitude_scale(&self) -> f64 {
        self.eta() * self.kappa()
    }
}

/// Output of [`prepare_krylov_state`].
///
/// Ancilla qubits, lowest first: the block-encoding register, the qubit
/// selecting `U_Φ` or `U_{−Φ}`, and, when both parities are present, the
/// qubit combining them.
#[derive(Clone, Debug)]
pub struct PreparedState {
    pub state: StateVector,
    pub lcu_ancillas: usize,
    pub eta: f64,
    pub kappa: f64,
}

impl PreparedState {
    pub fn amplitude_scale(&self) -> f64 {
        self.eta * self.kappa
    }

    /// The system amplitudes with every ancilla in `|0⟩`.
    pub fn zero_block(&self) -> &[Complex64] {
        self.state.block(0)
    }

    /// Probability of finding every ancilla in `|0⟩`.
    pub fn success_probability(&self) -> f64 {
        self.zero_block().iter().map(|a| a.norm_sqr()).sum()
    }

    /// System density matrix with all ancillas traced out.
    pub fn reduced_density(&self) -> DMatrix<Complex64> {
        let d = 1usize << self.state.n_system();
        let mut rho = DMatrix::zeros(d, d);
        for block in self.state.amplitudes().chunks(d) {
            if block.iter().all(|a| a.norm_sqr() == 0.0) {
                continue;
            }
            for j in 0..d {
                let bj = block[j].conj();
                if bj == Complex64::default() {
                    continue;
                }
                for i in 0..d {
                    rho[(i, j)] += block[i] * bj;
                }
            }
        }
        rho
    }
}

/// Applies a real 2×2 gate `[[a, b], [c, d]]` to ancilla qubit `bit` of a
/// state whose system register spans `n_system` qubits.
fn apply_gate(amps: &mut [Complex64], n_system: usize, bit: usize, m: [[f64; 2]; 2]) {
    let stride = 1usize << (n_system + bit);
    for base in (0..amps.len()).step_by(2 * stride) {
        for i in base..base + stride {
            let (x0, x1) = (amps[i], amps[i + stride]);
            amps[i] = x0 * m[0][0] + x1 * m[0][1];
            amps[i + stride] = x0 * m[1][0] + x1 * m[1][1];
        }
    }
}

/// `G† U_Φ G` on one chunk, where `U_Φ` alternates `e^{iφ(2Π_G − 1)}` with
/// the qubitized iterate.
fn apply_qsp(be: &BlockEncoding, c: &mut [Complex64], reduced: &[f64], scratch: &mut [Complex64]) {
    be.prepare_raw(c);
    let d = reduced.len() - 1;
    be.phase_raw(c, reduced[d], scratch);
    for k in (0..d).rev() {
        be.select_raw(c, scratch);
        be.reflect_raw(c, scratch);
        be.phase_raw(c, reduced[k], scratch);
    }
    be.prepare_raw(c);
}

/// Emulates the circuit preparing `p(H)|ψ₀⟩/(ηκ)` in the all-zero ancilla block.
///
/// Each parity part contributes `(U_Φ + U_{−Φ})/2` through a Hadamard-tested
/// selector qubit; the two parts are mixed by a rotation with amplitudes
/// `√(weight/κ)`.
pub fn prepare_krylov_state(
    be: &BlockEncoding,
    psi0: &StateVector,
    program: &QspProgram,
) -> Result<PreparedState> {
    if psi0.n_ancilla() != 0 || psi0.n_system() != be.n_system() {
        return Err(Error::QubitMismatch(psi0.n_system(), be.n_system()));
    }
    let ns = be.n_system();
    let na = be.n_ancilla();
    let n_comb = usize::from(program.parts.len() > 1);
    let mut state = StateVector::zero(ns, na + 1 + n_comb)?;
    state.amplitudes_mut()[..1 << ns].copy_from_slice(psi0.amplitudes());

    let kappa = program.kappa();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let hadamard = [[h, h], [h, -h]];
    let comb = if n_comb == 1 {
        let (a, b) = (
            (program.parts[0].weight / kappa).sqrt(),
            (program.parts[1].weight / kappa).sqrt(),
        );
        Some(([[a, -b], [b, a]], [[a, b], [-b, a]]))
    } else {
        None
    };

    let amps = state.amplitudes_mut();
    if let Some((r, _)) = comb {
        apply_gate(amps, ns, na + 1, r);
    }
    apply_gate(amps, ns, na, hadamard);
    let reduced: Vec<[Vec<f64>; 2]> = program
        .parts
        .iter()
        .map(|p| [p.phases.reduced(), p.phases.conjugate().reduced()])
        .collect();
    let mut scratch = vec![Complex64::default(); 1 << ns];
    for (k, chunk) in amps.chunks_mut(1 << (ns + na)).enumerate() {
        let (conj, part) = (k & 1, k >> 1);
        apply_qsp(be, chunk, &reduced[part][conj], &mut scratch);
    }
    apply_gate(amps, ns, na, hadamard);
    if let Some((_, rt)) = comb {
        apply_gate(amps, ns, na + 1, rt);
    }
    Ok(PreparedState {
        state,
        lcu_ancillas: na,
        eta: program.eta(),
        kappa,
    })
}
