//! Ladder-operator polynomials and their Jordan–Wigner images.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum, QuarterPhase};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Ladder { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Ladder { mode, dagger: false }
    }
}

/// Sum of products of ladder operators, applied right to left.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FermionOperator {
    pub terms: Vec<(Vec<Ladder>, C64)>,
}

impl FermionOperator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn term(ops: Vec<Ladder>, coeff: C64) -> Self {
        FermionOperator { terms: vec![(ops, coeff)] }
    }

    pub fn push(&mut self, ops: Vec<Ladder>, coeff: C64) {
        self.terms.push((ops, coeff));
    }

    pub fn scale(mut self, c: C64) -> Self {
        for (_, v) in &mut self.terms {
            *v *= c;
        }
        self
    }

    pub fn plus(mut self, other: FermionOperator) -> Self {
        self.terms.extend(other.terms);
        self
    }

    /// Hermitian conjugate: reverse each product and flip every dagger.
    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(ops, c)| {
                let rev = ops.iter().rev().map(|l| Ladder { mode: l.mode, dagger: !l.dagger }).collect();
                (rev, c.conj())
            })
            .collect();
        FermionOperator { terms }
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.terms.iter().flat_map(|(ops, _)| ops.iter().map(|l| l.mode)).max()
    }
}

/// Pauli expansion of a single ladder operator:
/// `a_p^dagger = Z_0..Z_{p-1} (X_p - iY_p)/2`, `a_p = Z_0..Z_{p-1} (X_p + iY_p)/2`.
fn ladder_terms(l: Ladder) -> [(PauliString, C64); 2] {
    let zs = (1u64 << l.mode) - 1;
    let bit = 1u64 << l.mode;
    let x = PauliString::from_masks(bit, zs);
    let y = PauliString::from_masks(bit, zs | bit);
    let sign = if l.dagger { -1.0 } else { 1.0 };
    [(x, C64::new(0.5, 0.0)), (y, C64::new(0.0, 0.5 * sign))]
}

/// Expands a ladder product into (possibly repeated) Pauli terms without hashing.
pub(crate) fn ladder_product(ops: &[Ladder], coeff: C64) -> Vec<(PauliString, C64)> {
    let mut acc = vec![(PauliString::IDENTITY, coeff)];
    for &l in ops {
        let factors = ladder_terms(l);
        let mut next = Vec::with_capacity(acc.len() * 2);
        for (p, c) in &acc {
            for (f, fc) in &factors {
                let (phase, prod): (QuarterPhase, PauliString) = p.mul(f);
                next.push((prod, phase.apply(c * fc)));
            }
        }
        acc = next;
    }
    acc
}

/// Jordan–Wigner image of `op` on `n_so` qubits (one qubit per spin-orbital).
pub fn jordan_wigner(op: &FermionOperator, n_so: usize) -> Result<PauliSum> {
    if let Some(m) = op.max_mode() {
        if m >= n_so {
            return Err(Error::QubitIndex { index: m, n_qubits: n_so });
        }
    }
    let terms = op.terms.iter().flat_map(|(ops, c)| ladder_product(ops, *c));
    PauliSum::from_terms(n_so, terms)
}
