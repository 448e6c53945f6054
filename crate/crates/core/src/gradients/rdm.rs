use std::collections::{BTreeSet, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::json;

use crate::error::{Error, Result};
use crate::ingest::Estimator;
use crate::operators::{jordan_wigner, FermionOperator, PauliSum, PauliTerm, Tensor4};
use crate::qsp::PreparedState;
use crate::simulator::StateVector;

/// Imaginary parts of RDM elements above this (relative) size are an error.
const IMAGINARY_TOLERANCE: f64 = 1e-9;

/// Spin-summed excitation `Ê_pq = Σ_σ a†_pσ a_qσ` over interleaved spin orbitals.
pub fn excitation_operator(p: usize, q: usize, n_orbitals: usize) -> Result<PauliSum> {
    if p >= n_orbitals || q >= n_orbitals {
        return Err(Error::ModeOutOfRange {
            index: p.max(q),
            n_modes: n_orbitals,
        });
    }
    let op = FermionOperator::excitation(2 * p, 2 * q)
        .add(&FermionOperator::excitation(2 * p + 1, 2 * q + 1));
    jordan_wigner(&op, 2 * n_orbitals)
}

/// `(O + O†)/2` and `(O − O†)/(2i)`.
pub fn hermitian_parts(op: &PauliSum) -> Result<(PauliSum, PauliSum)> {
    let adj = op.adjoint();
    let re = op.add(&adj)?.scale(Complex64::new(0.5, 0.0));
    let im = op
        .add(&adj.scale(Complex64::new(-1.0, 0.0)))?
        .scale(Complex64::new(0.0, -0.5));
    Ok((re, im))
}

/// Unique one-body elements `p ≤ q`; `γ_qp = γ_pq` for real states.
pub(crate) fn one_body_elements(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|p| (p..n).map(move |q| (p, q))).collect()
}

pub(crate) fn one_body_orbit(p: usize, q: usize) -> Vec<(usize, usize)> {
    if p == q {
        vec![(p, q)]
    } else {
        vec![(p, q), (q, p)]
    }
}

/// Unique two-body elements under `(pq, rs) ↔ (sr, qp)`, the adjoint map.
pub(crate) fn two_body_elements(n: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let e = [p, q, r, s];
                    if e <= [s, r, q, p] {
                        out.push(e);
                    }
                }
            }
        }
    }
    out
}

pub(crate) fn two_body_orbit(e: [usize; 4]) -> Vec<[usize; 4]> {
    let [p, q, r, s] = e;
    if e == [s, r, q, p] {
        vec![e]
    } else {
        vec![e, [s, r, q, p]]
    }
}

/// One- and two-particle RDMs of a real state over spatial orbitals.
///
/// `gamma[(p, q)] = ⟨Ê_pq⟩` and `two_rdm(p, q, r, s) = ⟨Ê_pq Ê_rs⟩`. The
/// two-body energy is `½ Σ g_pqrs Γ_pqrs`; the ½ is applied by
/// [`nuclear_gradient`](super::nuclear_gradient), not stored here.
/// Variances are single-shot values per element.
#[derive(Clone, Debug, PartialEq)]
pub struct RdmPair {
    pub estimator: Estimator,
    pub n_orbitals: usize,
    pub gamma: DMatrix<f64>,
    pub two_rdm: Tensor4,
    pub gamma_variance: DMatrix<f64>,
    pub two_rdm_variance: Tensor4,
}

impl RdmPair {
    pub fn zeros(n_orbitals: usize, estimator: Estimator) -> Self {
        RdmPair {
            estimator,
            n_orbitals,
            gamma: DMatrix::zeros(n_orbitals, n_orbitals),
            two_rdm: Tensor4::zeros(n_orbitals),
            gamma_variance: DMatrix::zeros(n_orbitals, n_orbitals),
            two_rdm_variance: Tensor4::zeros(n_orbitals),
        }
    }

    pub fn trace(&self) -> f64 {
        self.gamma.trace()
    }

    /// `a·self + b·other` on values; variances are taken from `self`.
    pub fn combine(&self, a: f64, other: &RdmPair, b: f64) -> Result<RdmPair> {
        if other.n_orbitals != self.n_orbitals {
            return Err(Error::Invalid("RDM shapes differ".into()));
        }
        let mut out = self.clone();
        out.gamma = &self.gamma * a + &other.gamma * b;
        out.two_rdm = self.two_rdm.map(|v| a * v);
        out.two_rdm.axpy(b, &other.two_rdm);
        Ok(out)
    }

    /// Row-major JSON dump with variance arrays.
    pub fn to_json(&self) -> Result<String> {
        let row_major = |m: &DMatrix<f64>| -> Vec<f64> {
            (0..m.nrows())
                .flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)]))
                .collect()
        };
        let v = json!({
            "estimator": self.estimator.name(),
            "n_orbitals": self.n_orbitals,
            "gamma": row_major(&self.gamma),
            "gamma_variance": row_major(&self.gamma_variance),
            "two_rdm": self.two_rdm.data(),
            "two_rdm_variance": self.two_rdm_variance.data(),
        });
        Ok(serde_json::to_string_pretty(&v)?)
    }
}

/// Expectation values of one Pauli string on a prepared state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliStats {
    /// `⟨block|P|block⟩` on the unnormalized all-zero ancilla block.
    pub zero_block: f64,
    /// `o₁ = ⟨φ|1⊗P|φ⟩` on the full register.
    pub full: f64,
    /// `o₂ = ⟨φ|R₀⊗P|φ⟩` with `R₀ = 2|0⟩⟨0|_a − 1`.
    pub reflected: f64,
}

/// One pass over the ancilla blocks of the prepared state.
pub fn pauli_stats(prep: &PreparedState, term: &PauliTerm) -> PauliStats {
    let d = 1usize << prep.state.n_system();
    let (mut zero, mut rest) = (0.0, 0.0);
    for (a, block) in prep.state.amplitudes().chunks(d).enumerate() {
        let v = term.matrix_element(block, block).re;
        if a == 0 {
            zero = v;
        } else {
            rest += v;
        }
    }
    PauliStats {
        zero_block: zero,
        full: zero + rest,
        reflected: zero - rest,
    }
}

#[derive(Clone, Copy)]
enum Readout {
    Post { p: f64 },
    Coherent,
}

/// Value and single-shot variance of a hermitian Pauli sum.
fn combine(
    op: &PauliSum,
    readout: Readout,
    scale: f64,
    mut stats: impl FnMut(&PauliTerm) -> PauliStats,
) -> (f64, f64) {
    let (mut value, mut var) = (0.0, 0.0);
    let a2 = scale * scale;
    for (c, term) in op.terms() {
        let st = stats(&term);
        let w = c.re;
        match readout {
            Readout::Post { p } => {
                value += a2 * w * st.zero_block;
                if !term.is_identity() {
                    let m = st.zero_block / p;
                    var += a2 * a2 * w * w * (1.0 - m * m) / p;
                }
            }
            Readout::Coherent => {
                value += a2 * w * 0.5 * (st.full + st.reflected);
                if !term.is_identity() {
                    let v1 = 1.0 - st.full * st.full;
                    let v2 = 1.0 - st.reflected * st.reflected;
                    var += a2 * a2 * w * w * (v1 + v2) / 4.0;
                }
            }
        }
    }
    (value, var)
}

fn check_hermitian(op: &PauliSum) -> Result<()> {
    let err = op.hermiticity_error();
    if err > 1e-12 * op.one_norm().max(1.0) {
        return Err(Error::NotHermitian(err));
    }
    Ok(())
}

fn check_success(p: f64, floor: f64) -> Result<()> {
    if p < floor {
        return Err(Error::LowSuccessProbability { p, floor });
    }
    Ok(())
}

/// Post-selected estimate of `⟨Ψ|op|Ψ⟩` from the all-zero ancilla block.
///
/// `value = A² Σ ω_ν ⟨block|P_ν|block⟩` with `A = ηκ`; the variance is
/// `A⁴ Σ ω_ν² (1 − ⟨P_ν⟩²_ps)/p` with `⟨P_ν⟩_ps` the post-selected mean and
/// `p` the success probability, counting only the kept shots.
pub fn rdm_element_postselect(
    prep: &PreparedState,
    op: &PauliSum,
    floor: f64,
) -> Result<(f64, f64)> {
    check_hermitian(op)?;
    let p = prep.success_probability();
    check_success(p, floor)?;
    Ok(combine(
        op,
        Readout::Post { p },
        prep.amplitude_scale(),
        |t| pauli_stats(prep, t),
    ))
}

/// Coherent estimate: `A²(o₁ + o₂)/2` per Pauli string, with `o₁` and `o₂`
/// jointly measured on the unprojected state and their covariance neglected.
pub fn rdm_element_coherent(prep: &PreparedState, op: &PauliSum) -> Result<(f64, f64)> {
    check_hermitian(op)?;
    Ok(combine(
        op,
        Readout::Coherent,
        prep.amplitude_scale(),
        |t| pauli_stats(prep, t),
    ))
}

/// Where RDM elements are read from.
#[derive(Clone, Copy, Debug)]
pub enum RdmSource<'a> {
    /// A normalized system state, read without noise.
    Exact(&'a StateVector),
    PostSelection {
        prep: &'a PreparedState,
        floor: f64,
    },
    Coherent(&'a PreparedState),
}

impl RdmSource<'_> {
    fn estimator(&self) -> Estimator {
        match self {
            RdmSource::Exact(_) => Estimator::Exact,
            RdmSource::PostSelection { .. } => Estimator::PostSelection,
            RdmSource::Coherent(_) => Estimator::Coherent,
        }
    }

    fn n_system(&self) -> usize {
        match self {
            RdmSource::Exact(s) => s.n_system(),
            RdmSource::PostSelection { prep, .. } | RdmSource::Coherent(prep) => {
                prep.state.n_system()
            }
        }
    }

    fn stats(&self, term: &PauliTerm) -> PauliStats {
        match self {
            RdmSource::Exact(s) => {
                let v = term.matrix_element(s.amplitudes(), s.amplitudes()).re;
                PauliStats {
                    zero_block: v,
                    full: v,
                    reflected: v,
                }
            }
            RdmSource::PostSelection { prep, .. } | RdmSource::Coherent(prep) => {
                pauli_stats(prep, term)
            }
        }
    }
}

/// Evaluates every distinct string once, in parallel, keyed by its masks.
fn collect_stats(source: &RdmSource, ops: &[&PauliSum]) -> HashMap<(u64, u64), PauliStats> {
    let strings: BTreeSet<(u64, u64)> = ops
        .iter()
        .flat_map(|op| op.terms().map(|(_, t)| (t.x_mask(), t.z_mask())))
        .collect();
    let strings: Vec<(u64, u64)> = strings.into_iter().collect();
    let n = source.n_system();
    let workers = std::thread::available_parallelism()
        .map_or(1, |w| w.get())
        .min(strings.len().max(1));
    let chunk = strings.len().div_ceil(workers).max(1);
    let results: Vec<Vec<PauliStats>> = std::thread::scope(|scope| {
        let handles: Vec<_> = strings
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|&(x, z)| {
                            let t = PauliTerm::new(n, x, z, crate::operators::Phase::ONE)
                                .expect("masks fit the register");
                            source.stats(&t)
                        })
                        .collect()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("Pauli evaluation thread panicked"))
            .collect()
    });
    strings
        .into_iter()
        .zip(results.into_iter().flatten())
        .collect()
}

/// Hermitized RDM observables: real and imaginary parts of each unique element.
struct Observables {
    one: Vec<((usize, usize), PauliSum, PauliSum)>,
    two: Vec<([usize; 4], PauliSum, PauliSum)>,
}

fn observables(n: usize) -> Result<Observables> {
    let mut e = Vec::with_capacity(n * n);
    for p in 0..n {
        for q in 0..n {
            e.push(excitation_operator(p, q, n)?);
        }
    }
    let mut one = Vec::new();
    for (p, q) in one_body_elements(n) {
        let (re, im) = hermitian_parts(&e[p * n + q])?;
        one.push(((p, q), re, im));
    }
    let mut two = Vec::new();
    for el in two_body_elements(n) {
        let [p, q, r, s] = el;
        let prod = e[p * n + q].mul(&e[r * n + s])?;
        let (re, im) = hermitian_parts(&prod)?;
        two.push((el, re, im));
    }
    Ok(Observables { one, two })
}

/// Measures all unique `γ_pq` and `Γ_pqrs` and mirrors them.
///
/// The imaginary part of each element is evaluated as well and must vanish.
pub fn measure_rdms(source: RdmSource, n_orbitals: usize) -> Result<RdmPair> {
    if source.n_system() != 2 * n_orbitals {
        return Err(Error::QubitMismatch(source.n_system(), 2 * n_orbitals));
    }
    let (readout, scale) = match source {
        RdmSource::Exact(s) => {
            if (s.norm() - 1.0).abs() > 1e-10 {
                return Err(Error::Invalid(format!("state has norm {}", s.norm())));
            }
            (Readout::Coherent, 1.0)
        }
        RdmSource::PostSelection { prep, floor } => {
            let p = prep.success_probability();
            check_success(p, floor)?;
            (Readout::Post { p }, prep.amplitude_scale())
        }
        RdmSource::Coherent(prep) => (Readout::Coherent, prep.amplitude_scale()),
    };
    let obs = observables(n_orbitals)?;
    let all: Vec<&PauliSum> = obs
        .one
        .iter()
        .flat_map(|(_, a, b)| [a, b])
        .chain(obs.two.iter().flat_map(|(_, a, b)| [a, b]))
        .collect();
    let table = collect_stats(&source, &all);
    let lookup = |t: &PauliTerm| table[&(t.x_mask(), t.z_mask())];
    let exact = matches!(source, RdmSource::Exact(_));
    let eval = |re: &PauliSum, im: &PauliSum| -> Result<(f64, f64)> {
        let (v, var) = combine(re, readout, scale, lookup);
        let (vi, _) = combine(im, readout, scale, lookup);
        if vi.abs() > IMAGINARY_TOLERANCE * v.abs().max(1.0) {
            return Err(Error::Invalid(format!(
                "RDM element has imaginary part {vi:e}"
            )));
        }
        Ok((v, if exact { 0.0 } else { var }))
    };

    let mut rdm = RdmPair::zeros(n_orbitals, source.estimator());
    for ((p, q), re, im) in &obs.one {
        let (v, var) = eval(re, im)?;
        for (a, b) in one_body_orbit(*p, *q) {
            rdm.gamma[(a, b)] = v;
            rdm.gamma_variance[(a, b)] = var;
        }
    }
    for (el, re, im) in &obs.two {
        let (v, var) = eval(re, im)?;
        for [p, q, r, s] in two_body_orbit(*el) {
            rdm.two_rdm.set(p, q, r, s, v);
            rdm.two_rdm_variance.set(p, q, r, s, var);
        }
    }
    Ok(rdm)
}
