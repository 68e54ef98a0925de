//! Qubit Hamiltonian and spin operators.
//!
//! Spin-orbital to qubit assignment is fixed by [`SPIN_ORDERING`].

use num_complex::Complex64 as C64;
use rustc_hash::FxHashMap;

use super::fcidump::MolecularSystem;
use super::fermion::{jordan_wigner, ladder_product, FermionOperator, Ladder};
use crate::error::Result;
use crate::pauli::{PauliString, PauliSum, DEFAULT_THRESHOLD};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Spin {
    Alpha,
    Beta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinOrdering {
    /// Alpha orbital `p` on qubit `p`, beta on `p + n`.
    Blocked,
    /// Alpha orbital `p` on qubit `2p`, beta on `2p + 1`.
    Interleaved,
}

pub const SPIN_ORDERING: SpinOrdering = SpinOrdering::Interleaved;

/// Qubit index of spatial orbital `p` with the given spin.
pub fn spin_orbital(p: usize, spin: Spin, n_orbitals: usize) -> usize {
    match (SPIN_ORDERING, spin) {
        (SpinOrdering::Blocked, Spin::Alpha) => p,
        (SpinOrdering::Blocked, Spin::Beta) => p + n_orbitals,
        (SpinOrdering::Interleaved, Spin::Alpha) => 2 * p,
        (SpinOrdering::Interleaved, Spin::Beta) => 2 * p + 1,
    }
}

pub fn spin_of(so: usize, n_orbitals: usize) -> Spin {
    let alpha = match SPIN_ORDERING {
        SpinOrdering::Blocked => so < n_orbitals,
        SpinOrdering::Interleaved => so % 2 == 0,
    };
    if alpha {
        Spin::Alpha
    } else {
        Spin::Beta
    }
}

fn spatial(so: usize, n_orbitals: usize) -> usize {
    match SPIN_ORDERING {
        SpinOrdering::Blocked => so % n_orbitals,
        SpinOrdering::Interleaved => so / 2,
    }
}

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// `H = sum h[p][q] a+_p a_q + 1/2 sum v[pq][sr] a+_p a+_q a_r a_s + E_core`,
/// with physicist `v[pq][sr] = (ps|qr)` taken from the chemist-ordered integrals.
pub fn build_hamiltonian(sys: &MolecularSystem) -> Result<PauliSum> {
    let n = sys.n_orbitals;
    let nso = 2 * n;
    let mut acc: FxHashMap<PauliString, C64> = FxHashMap::default();
    let mut push = |ops: &[Ladder], c: f64| {
        for (p, v) in ladder_product(ops, C64::new(c, 0.0)) {
            *acc.entry(p).or_default() += v;
        }
    };

    for p in 0..nso {
        for q in 0..nso {
            if spin_of(p, n) != spin_of(q, n) {
                continue;
            }
            let h = sys.h1(spatial(p, n), spatial(q, n));
            if h != 0.0 {
                push(&[Ladder::create(p), Ladder::annihilate(q)], h);
            }
        }
    }
    for p in 0..nso {
        for q in 0..nso {
            if p == q {
                continue;
            }
            for r in 0..nso {
                for s in 0..nso {
                    if r == s || spin_of(p, n) != spin_of(s, n) || spin_of(q, n) != spin_of(r, n) {
                        continue;
                    }
                    let v = sys.h2(spatial(p, n), spatial(s, n), spatial(q, n), spatial(r, n));
                    if v != 0.0 {
                        push(
                            &[Ladder::create(p), Ladder::create(q), Ladder::annihilate(r), Ladder::annihilate(s)],
                            0.5 * v,
                        );
                    }
                }
            }
        }
    }
    *acc.entry(PauliString::IDENTITY).or_default() += C64::new(sys.core_energy, 0.0);

    // Coefficients are real up to rounding in the phase products.
    let terms = acc.into_iter().map(|(p, c)| (p, C64::new(c.re, 0.0)));
    PauliSum::from_terms(nso, terms)
}

/// Total number operator on `n_so` spin-orbitals.
pub fn number_operator(n_so: usize) -> Result<PauliSum> {
    let mut op = FermionOperator::new();
    for p in 0..n_so {
        op.push(vec![Ladder::create(p), Ladder::annihilate(p)], ONE);
    }
    jordan_wigner(&op, n_so)
}

/// `S_z = 1/2 sum_p (n_p,alpha - n_p,beta)`.
pub fn s_z(n_orbitals: usize) -> Result<PauliSum> {
    let mut op = FermionOperator::new();
    for p in 0..n_orbitals {
        let a = spin_orbital(p, Spin::Alpha, n_orbitals);
        let b = spin_orbital(p, Spin::Beta, n_orbitals);
        op.push(vec![Ladder::create(a), Ladder::annihilate(a)], ONE * 0.5);
        op.push(vec![Ladder::create(b), Ladder::annihilate(b)], ONE * -0.5);
    }
    jordan_wigner(&op, 2 * n_orbitals)
}

/// `S^2 = S_- S_+ + S_z (S_z + 1)`.
pub fn s_squared(n_orbitals: usize) -> Result<PauliSum> {
    let nso = 2 * n_orbitals;
    let mut raise = FermionOperator::new();
    for p in 0..n_orbitals {
        let a = spin_orbital(p, Spin::Alpha, n_orbitals);
        let b = spin_orbital(p, Spin::Beta, n_orbitals);
        raise.push(vec![Ladder::create(a), Ladder::annihilate(b)], ONE);
    }
    let s_plus = jordan_wigner(&raise, nso)?;
    let s_minus = s_plus.adjoint();
    let sz = s_z(n_orbitals)?;
    let sz_shift = sz.add(&PauliSum::identity(nso, ONE))?;
    s_minus.mul(&s_plus)?.add(&sz.mul(&sz_shift)?)
}

/// `H + (mu/2) S^2`.
pub fn penalized_hamiltonian(h: &PauliSum, mu: f64) -> Result<PauliSum> {
    let s2 = s_squared(h.n_qubits() / 2)?;
    Ok(h.add(&s2.scale_real(0.5 * mu))?.simplify(DEFAULT_THRESHOLD))
}

/// Lowest-energy occupation: alpha orbitals `0..n_alpha`, beta orbitals `0..n_beta`.
pub fn hartree_fock_occupation(sys: &MolecularSystem) -> Vec<usize> {
    let n = sys.n_orbitals;
    (0..sys.n_alpha())
        .map(|p| spin_orbital(p, Spin::Alpha, n))
        .chain((0..sys.n_beta()).map(|p| spin_orbital(p, Spin::Beta, n)))
        .collect()
}

/// Computational-basis indices with `n_alpha` alpha and `n_beta` beta electrons.
pub fn fock_sector(n_orbitals: usize, n_alpha: usize, n_beta: usize) -> Vec<usize> {
    let alpha: usize = (0..n_orbitals).map(|p| 1 << spin_orbital(p, Spin::Alpha, n_orbitals)).sum();
    let beta: usize = (0..n_orbitals).map(|p| 1 << spin_orbital(p, Spin::Beta, n_orbitals)).sum();
    (0..1usize << (2 * n_orbitals))
        .filter(|b| (b & alpha).count_ones() as usize == n_alpha && (b & beta).count_ones() as usize == n_beta)
        .collect()
}
