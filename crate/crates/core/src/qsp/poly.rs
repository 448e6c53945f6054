use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of Chebyshev nodes scanned by [`compute_eta`].
pub const ETA_GRID: usize = 4096;

/// `Σ c_i T_i(x)` by Clenshaw recurrence.
pub fn chebyshev_eval(c: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ci in c.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ci;
        b2 = b1;
        b1 = b0;
    }
    c.first().copied().unwrap_or(0.0) + x * b1 - b2
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-13 {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    f1.max(f2)
}

/// `max_{|x|≤1} |Σ c_i T_i(x)|`: a scan over Chebyshev nodes and both
/// endpoints, refined by golden-section search around every local maximum.
pub fn compute_eta(c: &[f64]) -> Result<f64> {
    if c.iter().all(|&v| v == 0.0) {
        return Err(Error::Invalid("all coefficients are zero".into()));
    }
    let f = |x: f64| chebyshev_eval(c, x).abs();
    let mut xs = Vec::with_capacity(ETA_GRID + 2);
    xs.push(1.0);
    xs.extend(
        (0..ETA_GRID)
            .map(|j| ((2 * j + 1) as f64 * std::f64::consts::PI / (2 * ETA_GRID) as f64).cos()),
    );
    xs.push(-1.0);
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best = vals.iter().copied().fold(0.0, f64::max);
    for i in 1..xs.len() - 1 {
        if vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] {
            best = best.max(golden_max(f, xs[i + 1], xs[i - 1]));
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(degree: usize) -> Self {
        if degree % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// One parity component of the target, rescaled to unit infinity norm.
#[derive(Clone, Debug, PartialEq)]
pub struct ParityPart {
    pub parity: Parity,
    pub degree: usize,
    /// Chebyshev coefficients of `p_part / ‖p_part‖∞`.
    pub coefficients: Vec<f64>,
    /// `‖p_part‖∞ / η`.
    pub norm: f64,
}

/// The Krylov polynomial `p(x) = Σ c_i T_i(x)` and its normalization
/// `f = p/η` with `η = ‖p‖∞`.
///
/// Odd and even parts are prepared separately and recombined through an
/// ancilla with weights `norm/κ`, `κ = Σ norm`, so the block reachable by
/// the circuit is `f(H)/κ` and the amplitude scale of the prepared state is
/// `η κ`. With a single parity `κ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetPolynomial {
    pub coefficients: Vec<f64>,
    pub eta: f64,
    pub parts: Vec<ParityPart>,
    pub kappa: f64,
}

impl TargetPolynomial {
    pub fn new(c: &[f64]) -> Result<Self> {
        let eta = compute_eta(c)?;
        let big = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut parts = Vec::new();
        for parity in [Parity::Even, Parity::Odd] {
            let part: Vec<f64> = c
                .iter()
                .enumerate()
                .map(|(i, &v)| if Parity::of(i) == parity { v } else { 0.0 })
                .collect();
            let Some(degree) = part.iter().rposition(|v| v.abs() > 1e-14 * big) else {
                continue;
            };
            let mut part = part[..=degree].to_vec();
            for (i, v) in part.iter_mut().enumerate() {
                if i % 2 != degree % 2 {
                    *v = 0.0;
                }
            }
            let norm = compute_eta(&part)?;
            parts.push(ParityPart {
                parity,
                degree,
                coefficients: part.iter().map(|v| v / norm).collect(),
                norm: norm / eta,
            });
        }
        let kappa = parts.iter().map(|p| p.norm).sum();
        Ok(TargetPolynomial {
            coefficients: c.to_vec(),
            eta,
            parts,
            kappa,
        })
    }

    /// `f(x) = p(x)/η`.
    pub fn evaluate(&self, x: f64) -> f64 {
        chebyshev_eval(&self.coefficients, x) / self.eta
    }

    pub fn normalized_coefficients(&self) -> Vec<f64> {
        self.coefficients.iter().map(|v| v / self.eta).collect()
    }

    /// Even and odd coefficient vectors of `p`, each of full length.
    pub fn split(&self) -> (Vec<f64>, Vec<f64>) {
        let pick = |parity| {
            self.coefficients
                .iter()
                .enumerate()
                .map(|(i, &v)| if Parity::of(i) == parity { v } else { 0.0 })
                .collect()
        };
        (pick(Parity::Even), pick(Parity::Odd))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clenshaw_matches_cosine() {
        for &x in &[-1.0, -0.3, 0.0, 0.7, 1.0] {
            let t5 = chebyshev_eval(&[0.0, 0.0, 0.0, 0.0, 0.0, 1.0], x);
            assert!((t5 - (5.0 * f64::acos(x)).cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn eta_simple_cases() {
        assert!((compute_eta(&[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((compute_eta(&[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-15);
        assert!(compute_eta(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn split_reassembles() {
        let t = TargetPolynomial::new(&[0.3, -0.2, 0.5, 0.1]).unwrap();
        let (e, o) = t.split();
        for i in 0..4 {
            assert_eq!(e[i] + o[i], t.coefficients[i]);
        }
        assert_eq!(t.parts.len(), 2);
        assert!(t.kappa >= 1.0 - 1e-12);
        for x in [-1.0, -0.4, 0.2, 0.9] {
            assert!(t.evaluate(x).abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn single_parity_has_unit_kappa() {
        let t = TargetPolynomial::new(&[0.0, 0.7, 0.0, -0.2]).unwrap();
        assert_eq!(t.parts.len(), 1);
        assert!((t.kappa - 1.0).abs() < 1e-12);
    }
}
