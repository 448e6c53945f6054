use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operators::{MolecularHamiltonian, Tensor4};

const KNOWN_KEYS: &[&str] = &["NORB", "NELEC", "MS2", "ORBSYM", "ISYM"];

/// Parses a number, accepting Fortran `D` exponents.
pub(crate) fn parse_float(token: &str, line: usize) -> Result<f64> {
    let t = token.replace(['D', 'd'], "E");
    t.parse::<f64>()
        .map_err(|_| Error::parse(line, format!("not a number: {token:?}")))
}

fn parse_index(token: &str, line: usize) -> Result<usize> {
    token
        .parse::<usize>()
        .map_err(|_| Error::parse(line, format!("not an index: {token:?}")))
}

struct Header {
    norb: usize,
    nelec: usize,
    ms2: i64,
    body_start: usize,
}

fn parse_header(text: &str, warnings: &mut Vec<String>) -> Result<Header> {
    let upper = text.to_ascii_uppercase();
    let start = upper
        .find("&FCI")
        .ok_or_else(|| Error::parse(1, "missing &FCI namelist header"))?;
    let rest = &upper[start + 4..];
    let (end, term_len) = match (rest.find("&END"), rest.find('/')) {
        (Some(a), Some(b)) if b < a => (b, 1),
        (Some(a), _) => (a, 4),
        (None, Some(b)) => (b, 1),
        (None, None) => return Err(Error::parse(1, "namelist header is not terminated")),
    };
    let body = &rest[..end];
    let header_end = start + 4 + end + term_len;
    let line = text[..header_end].matches('\n').count() + 1;

    let mut values: Vec<(String, Vec<String>)> = Vec::new();
    for token in body
        .split([',', ' ', '\t', '\n', '\r'])
        .filter(|t| !t.is_empty())
    {
        if let Some((k, v)) = token.split_once('=') {
            let mut vals = Vec::new();
            if !v.is_empty() {
                vals.push(v.to_string());
            }
            values.push((k.trim().to_string(), vals));
        } else if let Some((_, vals)) = values.last_mut() {
            vals.push(token.to_string());
        } else {
            return Err(Error::parse(
                line,
                format!("unexpected token {token:?} in header"),
            ));
        }
    }

    let scalar = |key: &str| -> Result<Option<i64>> {
        match values.iter().rev().find(|(k, _)| k == key) {
            None => Ok(None),
            Some((_, v)) if v.len() == 1 => v[0]
                .parse::<i64>()
                .map(Some)
                .map_err(|_| Error::parse(line, format!("{key} is not an integer"))),
            Some(_) => Err(Error::parse(line, format!("{key} expects a single value"))),
        }
    };
    let norb = scalar("NORB")?.ok_or_else(|| Error::parse(line, "header lacks NORB"))?;
    let nelec = scalar("NELEC")?.ok_or_else(|| Error::parse(line, "header lacks NELEC"))?;
    let ms2 = scalar("MS2")?.unwrap_or(0);
    if norb <= 0 || nelec < 0 {
        return Err(Error::parse(
            line,
            "NORB must be positive and NELEC non-negative",
        ));
    }
    for (k, _) in &values {
        if !KNOWN_KEYS.contains(&k.as_str()) {
            warnings.push(format!("ignoring unknown header key {k}"));
        }
    }
    Ok(Header {
        norb: norb as usize,
        nelec: nelec as usize,
        ms2,
        body_start: header_end,
    })
}

fn canonical4(i: usize, j: usize, k: usize, l: usize) -> (usize, usize, usize, usize) {
    let (i, j) = (i.max(j), i.min(j));
    let (k, l) = (k.max(l), k.min(l));
    if (i, j) >= (k, l) {
        (i, j, k, l)
    } else {
        (k, l, i, j)
    }
}

/// Parses FCIDUMP text, returning the Hamiltonian and any warnings.
///
/// Records are `value i j k l` with 1-based orbital indices: four nonzero
/// indices give `(ij|kl)`, `i j 0 0` gives `h_ij` and `0 0 0 0` the constant
/// energy. Single-index records (orbital energies) are ignored with a warning.
pub fn parse_fcidump_with_warnings(text: &str) -> Result<(MolecularHamiltonian, Vec<String>)> {
    let mut warnings = Vec::new();
    let header = parse_header(text, &mut warnings)?;
    let n = header.norb;
    let mut h = DMatrix::zeros(n, n);
    let mut g = Tensor4::zeros(n);
    let mut e_nuc = 0.0;
    let mut seen: HashMap<(usize, usize, usize, usize), f64> = HashMap::new();

    let first_line = text[..header.body_start].matches('\n').count() + 1;
    for (offset, raw) in text[header.body_start..].lines().enumerate() {
        let line = first_line + offset;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 5 {
            return Err(Error::parse(
                line,
                format!("expected 5 fields, found {}", fields.len()),
            ));
        }
        let v = parse_float(fields[0], line)?;
        let mut idx = [0usize; 4];
        for (slot, f) in idx.iter_mut().zip(&fields[1..]) {
            *slot = parse_index(f, line)?;
            if *slot > n {
                return Err(Error::parse(line, format!("index {slot} exceeds NORB={n}")));
            }
        }
        let [i, j, k, l] = idx;
        let key = match (i, j, k, l) {
            (0, 0, 0, 0) => {
                e_nuc = v;
                (0, 0, 0, 0)
            }
            (i, j, 0, 0) if i > 0 && j > 0 => {
                h[(i - 1, j - 1)] = v;
                h[(j - 1, i - 1)] = v;
                (i.max(j), i.min(j), 0, 0)
            }
            (i, 0, 0, 0) => {
                warnings.push(format!(
                    "line {line}: ignoring orbital energy record for orbital {i}"
                ));
                continue;
            }
            (i, j, k, l) if i > 0 && j > 0 && k > 0 && l > 0 => {
                g.set_symmetric(i - 1, j - 1, k - 1, l - 1, v);
                canonical4(i, j, k, l)
            }
            _ => {
                return Err(Error::parse(
                    line,
                    format!("invalid index pattern {i} {j} {k} {l}"),
                ))
            }
        };
        if let Some(old) = seen.insert(key, v) {
            if (old - v).abs() > 1e-12 * old.abs().max(1.0) {
                warnings.push(format!("line {line}: conflicting duplicate of {key:?} ({old} then {v}); keeping the last"));
            }
        }
    }
    let mol = MolecularHamiltonian::new(header.nelec, header.ms2, e_nuc, h, g)
        .map_err(|e| Error::parse(first_line - 1, e.to_string()))?;
    Ok((mol, warnings))
}

/// Parses FCIDUMP text, forwarding warnings to the `log` facade.
pub fn parse_fcidump(text: &str) -> Result<MolecularHamiltonian> {
    let (mol, warnings) = parse_fcidump_with_warnings(text)?;
    for w in warnings {
        log::warn!("{w}");
    }
    Ok(mol)
}

/// Serializes to FCIDUMP with unique entries only and round-trip precision.
pub fn write_fcidump(mol: &MolecularHamiltonian) -> String {
    let n = mol.n_orbitals();
    let mut out = String::new();
    let orbsym = vec!["1"; n].join(",");
    let _ = writeln!(
        out,
        " &FCI NORB={n},NELEC={},MS2={},",
        mol.n_electrons, mol.ms2
    );
    let _ = writeln!(out, "  ORBSYM={orbsym},");
    let _ = writeln!(out, "  ISYM=1,");
    let _ = writeln!(out, " &END");
    for i in 0..n {
        for j in 0..=i {
            for k in 0..n {
                for l in 0..=k {
                    if i * (i + 1) / 2 + j < k * (k + 1) / 2 + l {
                        continue;
                    }
                    let v = mol.g.get(i, j, k, l);
                    if v != 0.0 {
                        let _ = writeln!(out, "{v:.16e} {} {} {} {}", i + 1, j + 1, k + 1, l + 1);
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..=i {
            let v = mol.h[(i, j)];
            if v != 0.0 {
                let _ = writeln!(out, "{v:.16e} {} {} 0 0", i + 1, j + 1);
            }
        }
    }
    let _ = writeln!(out, "{:.16e} 0 0 0 0", mol.e_nuc);
    out
}
