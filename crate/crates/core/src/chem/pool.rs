//! Operator pools of anti-Hermitian generators.
//!
//! All three flavors share one index enumeration: spin-preserving singles over
//! same-spin pairs `p < q`, and doubles over four distinct spin-orbitals split
//! into an annihilated pair and a created pair with matching spin content.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::fermion::{jordan_wigner, FermionOperator, Ladder};
use super::hamiltonian::{spin_of, Spin};
use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolFlavor {
    Fermionic,
    QubitExcitation,
    PauliString,
}

impl PoolFlavor {
    pub fn prefix(self) -> &'static str {
        match self {
            PoolFlavor::Fermionic => "f",
            PoolFlavor::QubitExcitation => "q",
            PoolFlavor::PauliString => "p",
        }
    }
}

impl fmt::Display for PoolFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PoolFlavor::Fermionic => "fermionic",
            PoolFlavor::QubitExcitation => "qubit_excitation",
            PoolFlavor::PauliString => "pauli_string",
        })
    }
}

impl FromStr for PoolFlavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f" | "fermionic" => Ok(PoolFlavor::Fermionic),
            "q" | "qubit" | "qubit_excitation" | "qeb" => Ok(PoolFlavor::QubitExcitation),
            "p" | "pauli" | "pauli_string" => Ok(PoolFlavor::PauliString),
            other => Err(Error::Config(format!("unknown pool flavor `{other}`"))),
        }
    }
}

/// Excitation `annihilate -> create` over spin-orbitals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Excitation {
    pub annihilate: Vec<usize>,
    pub create: Vec<usize>,
}

impl Excitation {
    fn label(&self, flavor: PoolFlavor) -> String {
        let join = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        format!("{}:{}<-{}", flavor.prefix(), join(&self.create), join(&self.annihilate))
    }
}

/// Spin-preserving generalized singles and doubles on `n_orbitals` spatial orbitals.
pub fn excitations(n_orbitals: usize) -> Vec<Excitation> {
    let nso = 2 * n_orbitals;
    let spin = |i: usize| spin_of(i, n_orbitals);
    let mut out = Vec::new();
    for p in 0..nso {
        for q in p + 1..nso {
            if spin(p) == spin(q) {
                out.push(Excitation { annihilate: vec![p], create: vec![q] });
            }
        }
    }
    let alpha_count = |v: &[usize]| v.iter().filter(|&&i| spin(i) == Spin::Alpha).count();
    for a in 0..nso {
        for b in a + 1..nso {
            for c in b + 1..nso {
                for d in c + 1..nso {
                    for (low, high) in [([a, b], [c, d]), ([a, c], [b, d]), ([a, d], [b, c])] {
                        if alpha_count(&low) == alpha_count(&high) {
                            out.push(Excitation { annihilate: low.to_vec(), create: high.to_vec() });
                        }
                    }
                }
            }
        }
    }
    out
}

fn fermionic_generator(ex: &Excitation, nso: usize) -> Result<PauliSum> {
    let mut ops: Vec<Ladder> = ex.create.iter().rev().map(|&i| Ladder::create(i)).collect();
    ops.extend(ex.annihilate.iter().map(|&i| Ladder::annihilate(i)));
    let t = FermionOperator::term(ops, C64::new(1.0, 0.0));
    let tau = t.clone().plus(t.adjoint().scale(C64::new(-1.0, 0.0)));
    jordan_wigner(&tau, nso)
}

/// Qubit creation `Q+ = (X - iY)/2` and annihilation `Q = (X + iY)/2`.
fn qubit_ladder(q: usize, create: bool, nso: usize) -> Result<PauliSum> {
    let sign = if create { -0.5 } else { 0.5 };
    PauliSum::from_terms(
        nso,
        [
            (PauliString::from_masks(1 << q, 0), C64::new(0.5, 0.0)),
            (PauliString::from_masks(1 << q, 1 << q), C64::new(0.0, sign)),
        ],
    )
}

fn qubit_generator(ex: &Excitation, nso: usize) -> Result<PauliSum> {
    let mut t = PauliSum::identity(nso, C64::new(1.0, 0.0));
    for &i in ex.create.iter().rev() {
        t = t.mul(&qubit_ladder(i, true, nso)?)?;
    }
    for &i in &ex.annihilate {
        t = t.mul(&qubit_ladder(i, false, nso)?)?;
    }
    t.sub(&t.adjoint())
}

/// Indexed set of anti-Hermitian generators with excitation labels.
#[derive(Clone, Debug)]
pub struct OperatorPool {
    pub flavor: PoolFlavor,
    pub n_qubits: usize,
    pub generators: Vec<PauliSum>,
    pub labels: Vec<String>,
}

impl OperatorPool {
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// One generator per line: label, tab, then `;`-separated `re im string` terms.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (g, label) in self.generators.iter().zip(&self.labels) {
            let terms: Vec<String> = g
                .sorted_terms()
                .into_iter()
                .map(|(p, c)| format!("{:e} {:e} {}", c.re, c.im, p).trim_end().to_string())
                .collect();
            out.push_str(label);
            out.push('\t');
            out.push_str(&terms.join(" ; "));
            out.push('\n');
        }
        out
    }
}

pub fn make_pool(flavor: PoolFlavor, n_orbitals: usize) -> Result<OperatorPool> {
    let nso = 2 * n_orbitals;
    let exs = excitations(n_orbitals);
    let mut generators = Vec::new();
    let mut labels = Vec::new();
    match flavor {
        PoolFlavor::Fermionic => {
            for ex in &exs {
                generators.push(fermionic_generator(ex, nso)?);
                labels.push(ex.label(flavor));
            }
        }
        PoolFlavor::QubitExcitation => {
            for ex in &exs {
                generators.push(qubit_generator(ex, nso)?);
                labels.push(ex.label(flavor));
            }
        }
        PoolFlavor::PauliString => {
            let mut seen = std::collections::HashSet::new();
            for ex in &exs {
                for (p, _) in qubit_generator(ex, nso)?.sorted_terms() {
                    if seen.insert(p) {
                        generators.push(PauliSum::from_string(nso, p, C64::new(0.0, 1.0))?);
                        labels.push(format!("p:{p}"));
                    }
                }
            }
        }
    }
    Ok(OperatorPool { flavor, n_qubits: nso, generators, labels })
}
