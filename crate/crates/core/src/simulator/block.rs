use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::{check_cap, StateVector};
use crate::error::{Error, Result};
use crate::operators::{LcuOperator, PauliSum, PauliTerm};

/// LCU block encoding of `H = Σ α_k P_k / λ`.
///
/// The ancilla register holds `⌈log₂ K⌉` qubits for `K` terms; basis states
/// past `K − 1` carry zero amplitude in `|G⟩` and select acts trivially on
/// them. Operations act on any state whose lowest ancilla qubits are this
/// register, so extra ancillas above it are left untouched.
#[derive(Clone, Debug)]
pub struct BlockEncoding {
    lcu: LcuOperator,
    n_ancilla: usize,
    g: Vec<f64>,
    householder: Option<(Vec<f64>, f64)>,
}

impl BlockEncoding {
    pub fn new(lcu: LcuOperator) -> Result<Self> {
        if lcu.is_empty() {
            return Err(Error::Invalid("cannot block-encode an empty LCU".into()));
        }
        let n_ancilla = lcu.len().next_power_of_two().trailing_zeros() as usize;
        check_cap(lcu.n_qubits() + n_ancilla)?;
        let lambda = lcu.lambda();
        let mut g = vec![0.0; 1 << n_ancilla];
        for (slot, (a, _)) in g.iter_mut().zip(lcu.terms()) {
            *slot = (a / lambda).sqrt();
        }
        // G as the Householder reflection exchanging |0⟩ and |G⟩
        let mut v: Vec<f64> = g.iter().map(|x| -x).collect();
        v[0] += 1.0;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let householder = (vv > 1e-30).then_some((v, vv));
        Ok(BlockEncoding {
            lcu,
            n_ancilla,
            g,
            householder,
        })
    }

    pub fn lcu(&self) -> &LcuOperator {
        &self.lcu
    }

    pub fn lambda(&self) -> f64 {
        self.lcu.lambda()
    }

    pub fn n_system(&self) -> usize {
        self.lcu.n_qubits()
    }

    pub fn n_ancilla(&self) -> usize {
        self.n_ancilla
    }

    /// Amplitudes of `|G⟩`.
    pub fn g_state(&self) -> &[f64] {
        &self.g
    }

    /// The encoded operator `Ĥ/λ` as a Pauli sum.
    pub fn normalized_operator(&self) -> PauliSum {
        self.lcu
            .to_pauli_sum()
            .scale(Complex64::new(1.0 / self.lambda(), 0.0))
    }

    fn chunk(&self) -> usize {
        1 << (self.n_system() + self.n_ancilla)
    }

    fn check(&self, state: &StateVector) -> Result<()> {
        if state.n_system() != self.n_system() {
            return Err(Error::QubitMismatch(state.n_system(), self.n_system()));
        }
        if state.n_ancilla() < self.n_ancilla {
            return Err(Error::Invalid(format!(
                "state has {} ancillas, block encoding needs {}",
                state.n_ancilla(),
                self.n_ancilla
            )));
        }
        Ok(())
    }

    /// `|0⟩_a → |G⟩_a`. The reflection used is its own inverse.
    pub fn prepare(&self, state: &mut StateVector) -> Result<()> {
        self.check(state)?;
        let chunk = self.chunk();
        for c in state.amplitudes_mut().chunks_mut(chunk) {
            self.prepare_raw(c);
        }
        Ok(())
    }

    /// `G†`, identical to [`prepare`](Self::prepare).
    pub fn unprepare(&self, state: &mut StateVector) -> Result<()> {
        self.prepare(state)
    }

    /// `|k⟩_a|ψ⟩ → |k⟩_a P_k|ψ⟩`.
    pub fn select(&self, state: &mut StateVector) -> Result<()> {
        self.check(state)?;
        let chunk = self.chunk();
        let mut scratch = vec![Complex64::default(); 1 << self.n_system()];
        for c in state.amplitudes_mut().chunks_mut(chunk) {
            self.select_raw(c, &mut scratch);
        }
        Ok(())
    }

    /// `R_G = (2|G⟩⟨G| − 1) ⊗ 1`.
    pub fn reflect(&self, state: &mut StateVector) -> Result<()> {
        self.check(state)?;
        let chunk = self.chunk();
        let mut proj = vec![Complex64::default(); 1 << self.n_system()];
        for c in state.amplitudes_mut().chunks_mut(chunk) {
            self.reflect_raw(c, &mut proj);
        }
        Ok(())
    }

    /// The iterate `W = R_G U`.
    pub fn iterate(&self, state: &mut StateVector) -> Result<()> {
        self.select(state)?;
        self.reflect(state)
    }

    /// `|G⟩_a ⊗ |ψ⟩`.
    pub fn embed(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.n_ancilla() != 0 || psi.n_system() != self.n_system() {
            return Err(Error::QubitMismatch(psi.n_system(), self.n_system()));
        }
        let d = psi.amplitudes().len();
        let mut amps = vec![Complex64::default(); d << self.n_ancilla];
        for (k, &gk) in self.g.iter().enumerate() {
            for (dst, src) in amps[k * d..(k + 1) * d].iter_mut().zip(psi.amplitudes()) {
                *dst = src * gk;
            }
        }
        StateVector::from_amplitudes(self.n_system(), self.n_ancilla, amps)
    }

    /// `(⟨G|_a ⊗ 1)|state⟩` for a state carrying exactly this ancilla register.
    pub fn project(&self, state: &StateVector) -> Result<StateVector> {
        self.check(state)?;
        if state.n_ancilla() != self.n_ancilla {
            return Err(Error::Invalid(
                "projection needs exactly the block-encoding ancillas".into(),
            ));
        }
        let mut out = vec![Complex64::default(); 1 << self.n_system()];
        self.project_raw(state.amplitudes(), &mut out);
        StateVector::system(out)
    }

    pub(crate) fn prepare_raw(&self, c: &mut [Complex64]) {
        let Some((v, vv)) = &self.householder else {
            return;
        };
        let d = 1 << self.n_system();
        let mut t = vec![Complex64::default(); d];
        for (k, &vk) in v.iter().enumerate() {
            if vk != 0.0 {
                for (acc, a) in t.iter_mut().zip(&c[k * d..(k + 1) * d]) {
                    *acc += a * vk;
                }
            }
        }
        let f = 2.0 / vv;
        for (k, &vk) in v.iter().enumerate() {
            if vk != 0.0 {
                for (a, acc) in c[k * d..(k + 1) * d].iter_mut().zip(&t) {
                    *a -= acc * (f * vk);
                }
            }
        }
    }

    pub(crate) fn select_raw(&self, c: &mut [Complex64], scratch: &mut [Complex64]) {
        let d = scratch.len();
        for (k, (_, p)) in self.lcu.terms().iter().enumerate() {
            let block = &mut c[k * d..(k + 1) * d];
            scratch.fill(Complex64::default());
            p.apply_into(Complex64::new(1.0, 0.0), block, scratch);
            block.copy_from_slice(scratch);
        }
    }

    pub(crate) fn project_raw(&self, c: &[Complex64], out: &mut [Complex64]) {
        let d = out.len();
        out.fill(Complex64::default());
        for (k, &gk) in self.g.iter().enumerate() {
            if gk != 0.0 {
                for (o, a) in out.iter_mut().zip(&c[k * d..(k + 1) * d]) {
                    *o += a * gk;
                }
            }
        }
    }

    pub(crate) fn reflect_raw(&self, c: &mut [Complex64], proj: &mut [Complex64]) {
        self.project_raw(c, proj);
        let d = proj.len();
        for (k, &gk) in self.g.iter().enumerate() {
            for (a, p) in c[k * d..(k + 1) * d].iter_mut().zip(proj.iter()) {
                *a = p * (2.0 * gk) - *a;
            }
        }
    }

    /// `e^{iφ(2Π_G − 1)}` with `Π_G = |G⟩⟨G| ⊗ 1`.
    pub(crate) fn phase_raw(&self, c: &mut [Complex64], phi: f64, proj: &mut [Complex64]) {
        self.project_raw(c, proj);
        let d = proj.len();
        let em = Complex64::from_polar(1.0, -phi);
        let diff = Complex64::from_polar(1.0, phi) - em;
        for (k, &gk) in self.g.iter().enumerate() {
            for (a, p) in c[k * d..(k + 1) * d].iter_mut().zip(proj.iter()) {
                *a = *a * em + p * diff * gk;
            }
        }
    }

    /// Dense matrix of `G† U G` over ancilla ⊗ system; intended for tests.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        let n = self.n_system() + self.n_ancilla;
        let dim = 1usize << n;
        let mut m = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut s = StateVector::basis(self.n_system(), self.n_ancilla, col)?;
            self.prepare(&mut s)?;
            self.select(&mut s)?;
            self.unprepare(&mut s)?;
            for (row, a) in s.amplitudes().iter().enumerate() {
                m[(row, col)] = *a;
            }
        }
        Ok(m)
    }

    pub fn term(&self, k: usize) -> Option<&PauliTerm> {
        self.lcu.terms().get(k).map(|(_, p)| p)
    }
}

/// How `T_n(H)|ψ₀⟩` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChebyshevRoute {
    /// Project `W^n |G⟩|ψ₀⟩` back onto `⟨G|`.
    Qubitized,
    /// `T_{n+1} = 2H T_n − T_{n−1}` with the Pauli sum for `H`.
    Recurrence,
}

/// `T_n(H)|ψ₀⟩` for `n = 0..count`.
pub fn chebyshev_vectors(
    be: &BlockEncoding,
    psi0: &StateVector,
    count: usize,
    route: ChebyshevRoute,
) -> Result<Vec<StateVector>> {
    if psi0.n_ancilla() != 0 || psi0.n_system() != be.n_system() {
        return Err(Error::QubitMismatch(psi0.n_system(), be.n_system()));
    }
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    out.push(psi0.clone());
    match route {
        ChebyshevRoute::Qubitized => {
            let mut st = be.embed(psi0)?;
            for _ in 1..count {
                be.iterate(&mut st)?;
                out.push(be.project(&st)?);
            }
        }
        ChebyshevRoute::Recurrence => {
            let h = be.normalized_operator();
            for n in 1..count {
                let hv = out[n - 1].apply_pauli_sum(&h)?;
                let next = if n == 1 {
                    hv
                } else {
                    let prev = out[n - 2].amplitudes();
                    let amps = hv
                        .amplitudes()
                        .iter()
                        .zip(prev)
                        .map(|(a, b)| a * 2.0 - b)
                        .collect();
                    StateVector::system(amps)?
                };
                out.push(next);
            }
        }
    }
    Ok(out)
}

/// `T_n(H)|ψ₀⟩`.
pub fn chebyshev_apply(
    be: &BlockEncoding,
    psi0: &StateVector,
    n: usize,
    route: ChebyshevRoute,
) -> Result<StateVector> {
    Ok(chebyshev_vectors(be, psi0, n + 1, route)?
        .pop()
        .expect("n + 1 vectors"))
}
