//! FCIDUMP reader. Two-electron integrals are chemist-ordered `(ij|kl)` with
//! 1-based indices; every record is expanded to its eight symmetric images.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Records whose symmetric images disagree by more than this are rejected.
const CONFLICT_TOL: f64 = 1e-10;

/// Active-space integrals in the molecular-orbital basis (Hartree).
#[derive(Clone, Debug, PartialEq)]
pub struct MolecularSystem {
    pub n_orbitals: usize,
    pub n_electrons: usize,
    pub ms2: i32,
    pub core_energy: f64,
    h1: Vec<f64>,
    h2: Vec<f64>,
}

impl MolecularSystem {
    /// An all-zero system. Integrals are filled with [`Self::set_h1`] / [`Self::set_h2`].
    pub fn new(n_orbitals: usize, n_electrons: usize, ms2: i32, core_energy: f64) -> Result<Self> {
        if n_electrons > 2 * n_orbitals {
            return Err(Error::Contract(format!(
                "{n_electrons} electrons do not fit in {n_orbitals} spatial orbitals"
            )));
        }
        if ms2.unsigned_abs() as usize > n_electrons || (n_electrons as i32 + ms2) % 2 != 0 {
            return Err(Error::Contract(format!("MS2={ms2} inconsistent with {n_electrons} electrons")));
        }
        Ok(MolecularSystem {
            n_orbitals,
            n_electrons,
            ms2,
            core_energy,
            h1: vec![0.0; n_orbitals * n_orbitals],
            h2: vec![0.0; n_orbitals.pow(4)],
        })
    }

    pub fn n_spin_orbitals(&self) -> usize {
        2 * self.n_orbitals
    }

    pub fn n_alpha(&self) -> usize {
        ((self.n_electrons as i32 + self.ms2) / 2) as usize
    }

    pub fn n_beta(&self) -> usize {
        self.n_electrons - self.n_alpha()
    }

    pub fn h1(&self, p: usize, q: usize) -> f64 {
        self.h1[p * self.n_orbitals + q]
    }

    /// Chemist-notation `(pq|rs)`.
    pub fn h2(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.h2[self.idx4(p, q, r, s)]
    }

    fn idx4(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        let n = self.n_orbitals;
        ((p * n + q) * n + r) * n + s
    }

    /// Sets `h1[p][q]` and `h1[q][p]`.
    pub fn set_h1(&mut self, p: usize, q: usize, value: f64) {
        let n = self.n_orbitals;
        self.h1[p * n + q] = value;
        self.h1[q * n + p] = value;
    }

    /// Sets `(pq|rs)` and its seven symmetric images.
    pub fn set_h2(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        for (a, b, c, d) in images(p, q, r, s) {
            let i = self.idx4(a, b, c, d);
            self.h2[i] = value;
        }
    }

    /// Verifies the symmetry invariants of the integral tensors.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_orbitals;
        for p in 0..n {
            for q in 0..n {
                if (self.h1(p, q) - self.h1(q, p)).abs() > 1e-10 {
                    return Err(Error::Contract(format!("h1 not symmetric at ({p},{q})")));
                }
                for r in 0..n {
                    for s in 0..n {
                        let v = self.h2(p, q, r, s);
                        for (a, b, c, d) in images(p, q, r, s) {
                            if (self.h2(a, b, c, d) - v).abs() > 1e-10 {
                                return Err(Error::Contract(format!("h2 lacks 8-fold symmetry at ({p}{q}|{r}{s})")));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        parse_fcidump(&text)
    }
}

fn images(p: usize, q: usize, r: usize, s: usize) -> [(usize, usize, usize, usize); 8] {
    [(p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r), (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p)]
}

fn header_values(header: &str) -> HashMap<String, Vec<String>> {
    let mut out: HashMap<String, Vec<String>> = HashMap::new();
    let mut current: Option<String> = None;
    for tok in header.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
        if let Some((k, v)) = tok.split_once('=') {
            let key = k.trim().to_ascii_uppercase();
            let entry = out.entry(key.clone()).or_default();
            if !v.is_empty() {
                entry.push(v.to_string());
            }
            current = Some(key);
        } else if let Some(key) = &current {
            out.get_mut(key).expect("current key present").push(tok.to_string());
        }
    }
    out
}

/// Parses FCIDUMP text into a fully populated [`MolecularSystem`].
pub fn parse_fcidump(text: &str) -> Result<MolecularSystem> {
    let lines: Vec<&str> = text.lines().collect();
    let first = lines
        .iter()
        .position(|l| !l.trim().is_empty())
        .ok_or(Error::Parse { line: 1, message: "empty input".into() })?;
    if !lines[first].trim_start().to_ascii_uppercase().starts_with("&FCI") {
        return Err(Error::Parse { line: first + 1, message: "missing &FCI header".into() });
    }

    // The namelist ends at `&END` or a lone `/`.
    let mut header = String::new();
    let mut body_start = None;
    for (i, line) in lines.iter().enumerate().skip(first) {
        let upper = line.to_ascii_uppercase();
        let (mut content, done) = match upper.find("&END").or_else(|| upper.find('/')) {
            Some(pos) => (&line[..pos], true),
            None => (*line, false),
        };
        if i == first {
            content = &content.trim_start()["&FCI".len()..];
        }
        header.push_str(content);
        header.push(' ');
        if done {
            body_start = Some(i + 1);
            break;
        }
    }
    let body_start =
        body_start.ok_or(Error::Parse { line: first + 1, message: "unterminated header namelist".into() })?;

    let values = header_values(&header);
    let int_key = |key: &str| -> Result<i64> {
        values
            .get(key)
            .and_then(|v| v.first())
            .ok_or_else(|| Error::Parse { line: first + 1, message: format!("header missing {key}") })?
            .parse()
            .map_err(|_| Error::Parse { line: first + 1, message: format!("header {key} is not an integer") })
    };
    let norb = int_key("NORB")?;
    let nelec = int_key("NELEC")?;
    let ms2 = values.get("MS2").map(|_| int_key("MS2")).transpose()?.unwrap_or(0);
    if norb <= 0 || nelec < 0 {
        return Err(Error::Parse { line: first + 1, message: "NORB and NELEC must be positive".into() });
    }
    let n = norb as usize;
    let mut sys = MolecularSystem::new(n, nelec as usize, ms2 as i32, 0.0)
        .map_err(|e| Error::Parse { line: first + 1, message: e.to_string() })?;

    let mut seen_h1: HashMap<(usize, usize), f64> = HashMap::new();
    let mut seen_h2: HashMap<(usize, usize, usize, usize), f64> = HashMap::new();
    let mut core: Option<f64> = None;

    for (i, line) in lines.iter().enumerate().skip(body_start) {
        let lineno = i + 1;
        let err = |m: String| Error::Parse { line: lineno, message: m };
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 5 {
            return Err(err(format!("expected `value i j k l`, found {} fields", toks.len())));
        }
        let value: f64 =
            toks[0].replace(['D', 'd'], "E").parse().map_err(|_| err(format!("bad value `{}`", toks[0])))?;
        let mut idx = [0usize; 4];
        for (slot, tok) in idx.iter_mut().zip(&toks[1..]) {
            let v: i64 = tok.parse().map_err(|_| err(format!("bad index `{tok}`")))?;
            if v < 0 || v > norb {
                return Err(err(format!("index {v} out of range for NORB={norb}")));
            }
            *slot = v as usize;
        }
        let conflict = |old: f64| (old - value).abs() > CONFLICT_TOL;
        match idx {
            [0, 0, 0, 0] => {
                if core.is_some_and(conflict) {
                    return Err(err("conflicting core energy records".into()));
                }
                core = Some(value);
            }
            [p, q, 0, 0] if p > 0 && q > 0 => {
                let key = (p.max(q) - 1, p.min(q) - 1);
                if seen_h1.get(&key).copied().is_some_and(conflict) {
                    return Err(err(format!("conflicting one-electron record ({p},{q})")));
                }
                seen_h1.insert(key, value);
                sys.set_h1(p - 1, q - 1, value);
            }
            [p, q, r, s] if p > 0 && q > 0 && r > 0 && s > 0 => {
                let canon = images(p - 1, q - 1, r - 1, s - 1).into_iter().max().expect("eight images");
                if seen_h2.get(&canon).copied().is_some_and(conflict) {
                    return Err(err(format!("conflicting two-electron record ({p}{q}|{r}{s})")));
                }
                seen_h2.insert(canon, value);
                sys.set_h2(p - 1, q - 1, r - 1, s - 1, value);
            }
            // `i 0 0 0` orbital energies are informational only.
            [_, 0, 0, 0] => {}
            _ => return Err(err(format!("unrecognized index pattern {idx:?}"))),
        }
    }
    sys.core_energy = core.unwrap_or(0.0);
    Ok(sys)
}
