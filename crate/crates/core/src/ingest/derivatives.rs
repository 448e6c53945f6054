use std::collections::HashSet;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::fcidump::parse_float;
use crate::error::{Error, Result};
use crate::operators::{effective_one_body, Tensor4};

/// Integral derivatives with respect to one nuclear coordinate.
///
/// `dh` is the derivative of the FCIDUMP one-electron integrals and `dk` the
/// matching derivative of the effective one-body matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateDerivative {
    pub label: String,
    pub de_nuc: f64,
    pub dh: DMatrix<f64>,
    pub dk: DMatrix<f64>,
    pub dg: Tensor4,
}

impl CoordinateDerivative {
    pub fn new(label: impl Into<String>, de_nuc: f64, dh: DMatrix<f64>, dg: Tensor4) -> Self {
        let dk = effective_one_body(&dh, &dg);
        CoordinateDerivative {
            label: label.into(),
            de_nuc,
            dh,
            dk,
            dg,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegralDerivatives {
    pub n_orbitals: usize,
    pub coordinates: Vec<CoordinateDerivative>,
}

impl IntegralDerivatives {
    pub fn labels(&self) -> Vec<&str> {
        self.coordinates.iter().map(|c| c.label.as_str()).collect()
    }
}

struct Section {
    label: String,
    line: usize,
    records: usize,
    de: f64,
    dh: DMatrix<f64>,
    dg: Tensor4,
}

impl Section {
    fn finish(self) -> Result<CoordinateDerivative> {
        if self.records == 0 {
            return Err(Error::parse(
                self.line,
                format!("coordinate {} has no records", self.label),
            ));
        }
        Ok(CoordinateDerivative::new(
            self.label, self.de, self.dh, self.dg,
        ))
    }
}

/// Parses the line-oriented derivative format.
///
/// Each `coord LABEL` line opens a section holding `E value`,
/// `K i j value` and `G i j k l value` records with 0-based spatial indices.
/// Omitted entries are zero and every entry is expanded over its symmetry
/// partners. Text after `#` is ignored.
pub fn parse_derivatives(text: &str, n_orbitals: usize) -> Result<IntegralDerivatives> {
    let mut coordinates = Vec::new();
    let mut labels = HashSet::new();
    let mut current: Option<Section> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = content.split_whitespace().collect();
        let Some(&tag) = fields.first() else { continue };
        if tag == "coord" {
            if fields.len() != 2 {
                return Err(Error::parse(line, "expected `coord LABEL`"));
            }
            if !labels.insert(fields[1].to_string()) {
                return Err(Error::parse(
                    line,
                    format!("duplicate coordinate {}", fields[1]),
                ));
            }
            if let Some(s) = current.take() {
                coordinates.push(s.finish()?);
            }
            current = Some(Section {
                label: fields[1].to_string(),
                line,
                records: 0,
                de: 0.0,
                dh: DMatrix::zeros(n_orbitals, n_orbitals),
                dg: Tensor4::zeros(n_orbitals),
            });
            continue;
        }
        let section = current
            .as_mut()
            .ok_or_else(|| Error::parse(line, "record before any `coord` header"))?;
        let arity = match tag {
            "E" => 0,
            "K" => 2,
            "G" => 4,
            other => return Err(Error::parse(line, format!("unknown record tag {other:?}"))),
        };
        if fields.len() != arity + 2 {
            return Err(Error::parse(
                line,
                format!("`{tag}` record expects {} fields", arity + 1),
            ));
        }
        let mut idx = [0usize; 4];
        for (slot, f) in idx.iter_mut().zip(&fields[1..=arity]) {
            *slot = f
                .parse()
                .map_err(|_| Error::parse(line, format!("not an index: {f:?}")))?;
            if *slot >= n_orbitals {
                return Err(Error::parse(
                    line,
                    format!("index {slot} out of range for {n_orbitals} orbitals"),
                ));
            }
        }
        let v = parse_float(fields[arity + 1], line)?;
        match tag {
            "E" => section.de = v,
            "K" => {
                section.dh[(idx[0], idx[1])] = v;
                section.dh[(idx[1], idx[0])] = v;
            }
            _ => section.dg.set_symmetric(idx[0], idx[1], idx[2], idx[3], v),
        }
        section.records += 1;
    }
    if let Some(s) = current.take() {
        coordinates.push(s.finish()?);
    }
    if coordinates.is_empty() {
        return Err(Error::parse(1, "no coordinates declared"));
    }
    Ok(IntegralDerivatives {
        n_orbitals,
        coordinates,
    })
}

pub fn write_derivatives(d: &IntegralDerivatives) -> String {
    let n = d.n_orbitals;
    let mut out = String::new();
    for c in &d.coordinates {
        let _ = writeln!(out, "coord {}", c.label);
        let _ = writeln!(out, "E {:.16e}", c.de_nuc);
        for i in 0..n {
            for j in 0..=i {
                if c.dh[(i, j)] != 0.0 {
                    let _ = writeln!(out, "K {i} {j} {:.16e}", c.dh[(i, j)]);
                }
            }
        }
        for i in 0..n {
            for j in 0..=i {
                for k in 0..n {
                    for l in 0..=k {
                        if i * (i + 1) / 2 + j < k * (k + 1) / 2 + l {
                            continue;
                        }
                        let v = c.dg.get(i, j, k, l);
                        if v != 0.0 {
                            let _ = writeln!(out, "G {i} {j} {k} {l} {v:.16e}");
                        }
                    }
                }
            }
        }
    }
    out
}
