use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How RDMs, and hence gradients, are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// Expectation values taken directly from the Krylov state.
    Exact,
    /// Ancilla-zero post-selection on the QSP-prepared state.
    PostSelection,
    /// Joint measurement of `P` and `R₀P` without post-selection.
    Coherent,
    /// Differentiate the Krylov matrices themselves, no RDMs.
    Direct,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Exact => "exact",
            Estimator::PostSelection => "post",
            Estimator::Coherent => "coherent",
            Estimator::Direct => "direct",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(Estimator::Exact),
            "post" | "post-selection" | "postselection" => Ok(Estimator::PostSelection),
            "coherent" => Ok(Estimator::Coherent),
            "direct" => Ok(Estimator::Direct),
            other => Err(Error::Invalid(format!("unknown estimator {other:?}"))),
        }
    }
}

/// Shot budget per measured Pauli string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shots {
    /// Infinite-shot limit: exact values, single-shot variances reported.
    Analytic,
    Count(u64),
}

impl FromStr for Shots {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("analytic") {
            return Ok(Shots::Analytic);
        }
        match s.parse::<u64>() {
            Ok(n) if n > 0 => Ok(Shots::Count(n)),
            _ => Err(Error::Invalid(format!(
                "shots must be `analytic` or a positive integer, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Analytic => f.write_str("analytic"),
            Shots::Count(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dim: usize,
    pub threshold: f64,
    pub shots: Shots,
    pub ensemble: usize,
    pub state: usize,
    pub estimator: Estimator,
    pub seed: u64,
    pub sweep_dims: Vec<usize>,
    pub sweep_thresholds: Vec<f64>,
    /// Post-selection aborts below this success probability.
    pub success_floor: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: 4,
            threshold: 1e-3,
            shots: Shots::Analytic,
            ensemble: 100,
            state: 0,
            estimator: Estimator::Exact,
            seed: 0,
            sweep_dims: Vec::new(),
            sweep_thresholds: Vec::new(),
            success_floor: 1e-6,
        }
    }
}

fn parse_list<T: FromStr>(value: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        // `a..b` or `a..=b` ranges for integer lists
        if let Some((a, b)) = item.split_once("..") {
            let b = b.trim_start_matches('=');
            let (a, b): (usize, usize) = (
                a.parse()
                    .map_err(|_| Error::Invalid(format!("bad range start {a:?}")))?,
                b.parse()
                    .map_err(|_| Error::Invalid(format!("bad range end {b:?}")))?,
            );
            for v in a..=b {
                out.push(
                    v.to_string()
                        .parse()
                        .map_err(|_| Error::Invalid(format!("bad list item {item:?}")))?,
                );
            }
        } else {
            out.push(
                item.parse()
                    .map_err(|_| Error::Invalid(format!("bad list item {item:?}")))?,
            );
        }
    }
    Ok(out)
}

impl RunConfig {
    /// Sets one option by name; `-` and `_` are interchangeable in keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        let value = value.trim();
        let bad = |what: &str| Error::Invalid(format!("{key}: expected {what}, got {value:?}"));
        match key.as_str() {
            "dim" => self.dim = value.parse().map_err(|_| bad("an integer"))?,
            "threshold" => self.threshold = value.parse().map_err(|_| bad("a number"))?,
            "shots" => self.shots = value.parse()?,
            "ensemble" => self.ensemble = value.parse().map_err(|_| bad("an integer"))?,
            "state" => self.state = value.parse().map_err(|_| bad("an integer"))?,
            "estimator" => self.estimator = value.parse()?,
            "seed" => self.seed = value.parse().map_err(|_| bad("an integer"))?,
            "sweep_dim" | "sweep_dims" => self.sweep_dims = parse_list(value)?,
            "sweep_threshold" | "sweep_thresholds" => self.sweep_thresholds = parse_list(value)?,
            "success_floor" => self.success_floor = value.parse().map_err(|_| bad("a number"))?,
            _ => return Err(Error::Invalid(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file on top of `self`.
    pub fn merge_file(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content.split_once('=').ok_or_else(|| {
                Error::parse(i + 1, format!("expected key=value, got {content:?}"))
            })?;
            self.set(k, v)
                .map_err(|e| Error::parse(i + 1, e.to_string()))?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        c.merge_file(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.sweep_dims.contains(&0) {
            return Err(Error::Invalid("Krylov dimension must be at least 1".into()));
        }
        if self.state >= self.dim {
            return Err(Error::Invalid(format!(
                "state index {} must be below dim {}",
                self.state, self.dim
            )));
        }
        if self.ensemble == 0 {
            return Err(Error::Invalid("ensemble size must be at least 1".into()));
        }
        if !(self.threshold >= 0.0) || self.sweep_thresholds.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::Invalid("thresholds must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.success_floor) {
            return Err(Error::Invalid("success floor must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Dimensions to visit: the sweep list, or `dim` alone.
    pub fn dims(&self) -> Vec<usize> {
        if self.sweep_dims.is_empty() {
            vec![self.dim]
        } else {
            self.sweep_dims.clone()
        }
    }

    /// Thresholds to visit: the sweep list, or `threshold` alone.
    pub fn thresholds(&self) -> Vec<f64> {
        if self.sweep_thresholds.is_empty() {
            vec![self.threshold]
        } else {
            self.sweep_thresholds.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file() {
        let c = RunConfig::parse(
            "dim = 6\nthreshold=1e-8 # tight\nshots=1000\nestimator = post\nsweep-dim = 1..3, 5\n",
        )
        .unwrap();
        assert_eq!(c.dim, 6);
        assert_eq!(c.threshold, 1e-8);
        assert_eq!(c.shots, Shots::Count(1000));
        assert_eq!(c.estimator, Estimator::PostSelection);
        assert_eq!(c.sweep_dims, vec![1, 2, 3, 5]);
    }

    #[test]
    fn validation() {
        assert!(RunConfig::parse("dim=0").is_err());
        assert!(RunConfig::parse("dim=2\nstate=2").is_err());
        assert!(RunConfig::parse("ensemble=0").is_err());
        assert!(RunConfig::parse("threshold=-1").is_err());
        assert!(RunConfig::parse("colour=blue").is_err());
        assert!(RunConfig::parse("shots=0").is_err());
    }
}
