use std::f64::consts::{FRAC_PI_4, PI};
use std::path::Path;

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::{chebyshev_eval, compute_eta, Parity};
use crate::error::{Error, Result};

/// Largest residual on the fit grid accepted by [`fit_phases`].
pub const FIT_TOLERANCE: f64 = 1e-10;
/// Iteration cap shared by the quasi-Newton and Newton stages.
pub const MAX_ITERATIONS: usize = 10_000;
/// Target scales visited on the way to the full target.
/// Levenberg–Marquardt steps after each BFGS stage.
const POLISH_STEPS: usize = 400;

/// BFGS steps per continuation stage.
const BFGS_STEPS: usize = 2000;

const CONTINUATION: [f64; 5] = [0.25, 0.5, 0.75, 0.9, 1.0];

/// QSP phases `Φ = (φ₀, …, φ_d)` for
/// `U_Φ(x) = e^{iφ₀σz} Π_k [W(x) e^{iφ_kσz}]`, `W(x) = e^{i arccos(x) σy}`,
/// stored in the convention where `⟨0|U_Φ|0⟩ = P(x)` carries the target in
/// `Re P`. Internally the end phases are shifted by `∓π/4`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseFactors {
    pub degree: usize,
    pub parity: Parity,
    pub phases: Vec<f64>,
    /// Largest `|Re P(x_j) − f(x_j)|` on the fit grid.
    pub residual: f64,
}

fn wrap(phi: f64) -> f64 {
    let w = (phi + PI).rem_euclid(2.0 * PI) - PI;
    if w.abs() < 1e-300 {
        0.0
    } else {
        w
    }
}

impl PhaseFactors {
    pub fn from_phases(phases: Vec<f64>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::Invalid("phase list is empty".into()));
        }
        let degree = phases.len() - 1;
        Ok(PhaseFactors {
            degree,
            parity: Parity::of(degree),
            phases,
            residual: 0.0,
        })
    }

    fn from_reduced(reduced: &[f64], residual: f64) -> Self {
        let mut phases = reduced.to_vec();
        let d = phases.len() - 1;
        phases[0] += FRAC_PI_4;
        if d > 0 {
            phases[d] -= FRAC_PI_4;
        }
        PhaseFactors {
            degree: d,
            parity: Parity::of(d),
            phases: phases.into_iter().map(wrap).collect(),
            residual,
        }
    }

    /// Phases with the `∓π/4` end shifts removed, so that
    /// `⟨0|U|0⟩` is real for symmetric reduced phases.
    pub fn reduced(&self) -> Vec<f64> {
        let mut r = self.phases.clone();
        let d = self.degree;
        r[0] -= FRAC_PI_4;
        if d > 0 {
            r[d] += FRAC_PI_4;
        }
        r
    }

    /// Phases of `U_{−Φ} = U_Φ*`.
    pub fn conjugate(&self) -> Self {
        let reduced: Vec<f64> = self.reduced().iter().map(|p| -p).collect();
        PhaseFactors::from_reduced(&reduced, self.residual)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: PhaseFactors = serde_json::from_str(text)?;
        if p.phases.len() != p.degree + 1 || p.parity != Parity::of(p.degree) {
            return Err(Error::Invalid("inconsistent phase factor record".into()));
        }
        Ok(p)
    }
}

fn w_matrix(x: f64) -> Matrix2<Complex64> {
    let s = (1.0 - x * x).max(0.0).sqrt();
    Matrix2::new(x.into(), s.into(), (-s).into(), x.into())
}

fn z_rotation(phi: f64) -> Matrix2<Complex64> {
    let z = Complex64::default();
    Matrix2::new(
        Complex64::from_polar(1.0, phi),
        z,
        z,
        Complex64::from_polar(1.0, -phi),
    )
}

fn reduced_unitary(reduced: &[f64], x: f64) -> Matrix2<Complex64> {
    let w = w_matrix(x);
    let mut u = z_rotation(reduced[0]);
    for &phi in &reduced[1..] {
        u = u * w * z_rotation(phi);
    }
    u
}

/// The 2×2 QSP unitary `U_Φ(x)`.
pub fn qsp_unitary_scalar(phases: &PhaseFactors, x: f64) -> Result<Matrix2<Complex64>> {
    if !(x.abs() <= 1.0) {
        return Err(Error::Invalid(format!("QSP signal {x} outside [-1, 1]")));
    }
    Ok(reduced_unitary(&phases.reduced(), x))
}

/// Fit problem on the positive Chebyshev nodes with symmetric phases.
struct Fit {
    degree: usize,
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl Fit {
    fn expand(&self, theta: &[f64]) -> Vec<f64> {
        (0..=self.degree)
            .map(|k| theta[k.min(self.degree - k)])
            .collect()
    }

    /// Residuals and Jacobian with respect to the free phases.
    fn evaluate(&self, theta: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let phases = self.expand(theta);
        let d = self.degree;
        let n = self.grid.len();
        let iz = Matrix2::new(Complex64::i(), 0.0.into(), 0.0.into(), -Complex64::i());
        let mut r = DVector::zeros(self.grid.len());
        let mut jac = DMatrix::zeros(self.grid.len(), n);
        for (j, &x) in self.grid.iter().enumerate() {
            let w = w_matrix(x);
            let factor = |k: usize| {
                if k == 0 {
                    z_rotation(phases[0])
                } else {
                    w * z_rotation(phases[k])
                }
            };
            // prefix[k] = F_0 ⋯ F_{k−1}; suffix[k] = F_{k+1} ⋯ F_d
            let mut prefix = Vec::with_capacity(d + 1);
            let mut acc = Matrix2::<Complex64>::identity();
            for k in 0..=d {
                prefix.push(acc);
                acc *= factor(k);
            }
            r[j] = acc[(0, 0)].re - self.values[j];
            let mut suffix = vec![Matrix2::identity(); d + 1];
            for k in (0..d).rev() {
                suffix[k] = factor(k + 1) * suffix[k + 1];
            }
            for k in 0..=d {
                let dk = prefix[k] * factor(k) * iz * suffix[k];
                jac[(j, k.min(d - k))] += dk[(0, 0)].re;
            }
        }
        (r, jac)
    }

    fn loss(&self, theta: &[f64]) -> f64 {
        let (r, _) = self.evaluate(theta);
        0.5 * r.norm_squared()
    }
}

fn bfgs(fit: &Fit, theta: &mut DVector<f64>, iterations: &mut usize) {
    let n = theta.len();
    let budget = (*iterations + BFGS_STEPS).min(MAX_ITERATIONS);
    let mut hinv = DMatrix::<f64>::identity(n, n);
    let (mut r, jac) = fit.evaluate(theta.as_slice());
    let mut g = jac.transpose() * &r;
    let mut f = 0.5 * r.norm_squared();
    while *iterations < budget && r.amax() > 1e-6 * FIT_TOLERANCE.sqrt() {
        *iterations += 1;
        let mut p = -(&hinv * &g);
        if p.dot(&g) >= 0.0 {
            hinv = DMatrix::identity(n, n);
            p = -g.clone();
        }
        let mut step = 1.0;
        let slope = p.dot(&g);
        let mut accepted = None;
        while step > 1e-12 {
            let trial = &*theta + &p * step;
            let ft = fit.loss(trial.as_slice());
            if ft <= f + 1e-4 * step * slope {
                accepted = Some(trial);
                break;
            }
            step *= 0.5;
        }
        let Some(next) = accepted else { break };
        let (r2, j2) = fit.evaluate(next.as_slice());
        let g2 = j2.transpose() * &r2;
        let s = &next - &*theta;
        let y = &g2 - &g;
        let sy = s.dot(&y);
        if sy > 1e-300 {
            let rho = 1.0 / sy;
            let id = DMatrix::<f64>::identity(n, n);
            let left = &id - &s * y.transpose() * rho;
            let right = &id - &y * s.transpose() * rho;
            hinv = &left * &hinv * &right + &s * s.transpose() * rho;
        }
        *theta = next;
        r = r2;
        g = g2;
        f = 0.5 * r.norm_squared();
        if f < 1e-24 {
            break;
        }
    }
}

/// Levenberg–Marquardt polish; unlike plain Newton it keeps converging when
/// the Jacobian turns singular, as it does for targets touching `|f| = 1`.
fn polish(fit: &Fit, theta: &mut DVector<f64>, iterations: &mut usize) -> f64 {
    let (mut r, mut jac) = fit.evaluate(theta.as_slice());
    let n = theta.len();
    let mut mu = 1e-6;
    let mut stalled = 0;
    for _ in 0..POLISH_STEPS {
        if *iterations >= MAX_ITERATIONS || r.amax() < 1e-15 || stalled > 30 {
            break;
        }
        *iterations += 1;
        let jt = jac.transpose();
        let a = &jt * &jac + DMatrix::<f64>::identity(n, n) * mu;
        let Some(delta) = a.cholesky().map(|c| c.solve(&(&jt * &r))) else {
            mu *= 10.0;
            stalled += 1;
            continue;
        };
        let trial = &*theta - delta;
        let (r2, j2) = fit.evaluate(trial.as_slice());
        if r2.norm_squared() < r.norm_squared() {
            *theta = trial;
            r = r2;
            jac = j2;
            mu = (mu * 0.3).max(1e-15);
            stalled = 0;
        } else {
            mu *= 10.0;
            stalled += 1;
        }
    }
    r.amax()
}

/// Phases whose `Re ⟨0|U_Φ(x)|0⟩` equals `Σ c_i T_i(x)`.
///
/// `c` must have definite parity with `‖Σ c_i T_i‖∞ ≤ 1`. The residual is
/// minimized on `x_j = cos((2j−1)π/(4d̃))`, `d̃ = ⌈(d+1)/2⌉`, over symmetric
/// phases, starting from `(π/4, 0, …, 0, π/4)` where `Re P ≡ 0`. The target
/// is reached through a sequence of scaled targets, each solved by BFGS and
/// polished by Levenberg–Marquardt steps.
pub fn fit_phases(c: &[f64]) -> Result<PhaseFactors> {
    let Some(degree) = c.iter().rposition(|&v| v != 0.0) else {
        return Err(Error::Invalid("target polynomial is zero".into()));
    };
    let c = &c[..=degree];
    if c.iter()
        .enumerate()
        .any(|(i, &v)| i % 2 != degree % 2 && v != 0.0)
    {
        return Err(Error::Invalid("target polynomial has mixed parity".into()));
    }
    let dt = (degree + 2) / 2;
    let grid: Vec<f64> = (1..=dt)
        .map(|j| ((2 * j - 1) as f64 * PI / (4 * dt) as f64).cos())
        .collect();
    let values: Vec<f64> = grid.iter().map(|&x| chebyshev_eval(c, x)).collect();
    if compute_eta(c)? > 1.0 + 1e-12 {
        return Err(Error::Invalid(
            "target polynomial exceeds one in magnitude".into(),
        ));
    }
    let n = (degree + 2) / 2;
    let mut theta = DVector::zeros(n);
    theta[0] = if degree == 0 {
        std::f64::consts::FRAC_PI_2
    } else {
        FRAC_PI_4
    };
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut fit = Fit {
        degree,
        grid,
        values: Vec::new(),
    };
    // continuation in the target scale, warm-starting each stage
    for t in CONTINUATION {
        fit.values = values.iter().map(|v| v * t).collect();
        bfgs(&fit, &mut theta, &mut iterations);
        residual = polish(&fit, &mut theta, &mut iterations);
    }
    log::debug!("phase fit: degree {degree}, {iterations} iterations, residual {residual:e}");
    if !(residual <= FIT_TOLERANCE) {
        return Err(Error::PhaseFit {
            residual,
            iterations,
        });
    }
    let reduced = fit.expand(theta.as_slice());
    Ok(PhaseFactors::from_reduced(&reduced, residual))
}

/// Fitted phases keyed by their target coefficients.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PhaseCache {
    pub entries: Vec<PhaseCacheEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaseCacheEntry {
    pub target: Vec<f64>,
    pub phases: PhaseFactors,
}

impl PhaseCache {
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Ok(PhaseCache::default());
        }
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn get(&self, target: &[f64]) -> Option<&PhaseFactors> {
        self.entries
            .iter()
            .find(|e| {
                e.target.len() == target.len()
                    && e.target
                        .iter()
                        .zip(target)
                        .all(|(a, b)| (a - b).abs() <= 1e-12)
            })
            .map(|e| &e.phases)
    }

    pub fn insert(&mut self, target: &[f64], phases: PhaseFactors) {
        if self.get(target).is_none() {
            self.entries.push(PhaseCacheEntry {
                target: target.to_vec(),
                phases,
            });
        }
    }
}
