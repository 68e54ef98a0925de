//! Sparse complex-weighted sums of multi-qubit Pauli strings.
//!
//! A [`PauliString`] is stored as a pair of bitmasks (`x`, `z`), two bits per
//! qubit: `X = (1,0)`, `Z = (0,1)`, `Y = (1,1)`. The letter `Y` is a genuine
//! letter, not `XZ`, so the encoding is canonical and usable as a hash key.
//! Products between strings carry an exact quarter phase `i^k`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest qubit count representable by the packed encoding.
pub const MAX_QUBITS: usize = 64;

/// Coefficients with magnitude at or below this are dropped by [`PauliSum::simplify`].
pub const DEFAULT_THRESHOLD: f64 = 1e-12;

/// Products above this many string pairs are evaluated in parallel.
const PARALLEL_PRODUCTS: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A power of `i`, kept as an integer mod 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct QuarterPhase(u8);

impl QuarterPhase {
    pub const ONE: QuarterPhase = QuarterPhase(0);

    pub fn new(k: u32) -> Self {
        QuarterPhase((k % 4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> C64 {
        match self.0 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    /// Multiplies `c` by this phase without any floating-point rounding.
    pub fn apply(self, c: C64) -> C64 {
        match self.0 {
            0 => c,
            1 => C64::new(-c.im, c.re),
            2 => -c,
            _ => C64::new(c.im, -c.re),
        }
    }
}

impl std::ops::Mul for QuarterPhase {
    type Output = QuarterPhase;
    fn mul(self, rhs: Self) -> Self {
        QuarterPhase((self.0 + rhs.0) % 4)
    }
}

/// Tensor product of single-qubit Pauli letters; identity on absent qubits.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PauliString {
    x: u64,
    z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn identity() -> Self {
        Self::IDENTITY
    }

    pub fn from_masks(x: u64, z: u64) -> Self {
        PauliString { x, z }
    }

    pub fn single(qubit: usize, letter: Pauli) -> Result<Self> {
        Self::from_letters(&[(qubit, letter)])
    }

    /// Builds a string from `(qubit, letter)` pairs. Repeated qubits are an error.
    pub fn from_letters(letters: &[(usize, Pauli)]) -> Result<Self> {
        let mut s = PauliString::IDENTITY;
        for &(q, p) in letters {
            if q >= MAX_QUBITS {
                return Err(Error::QubitIndex { index: q, n_qubits: MAX_QUBITS });
            }
            let bit = 1u64 << q;
            if (s.x | s.z) & bit != 0 {
                return Err(Error::Contract(format!("qubit {q} appears twice in Pauli string")));
            }
            let (xb, zb) = p.bits();
            if xb {
                s.x |= bit;
            }
            if zb {
                s.z |= bit;
            }
        }
        Ok(s)
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Highest qubit index acted on, if any.
    pub fn max_qubit(&self) -> Option<usize> {
        let s = self.support();
        (s != 0).then(|| 63 - s.leading_zeros() as usize)
    }

    pub fn letter(&self, qubit: usize) -> Option<Pauli> {
        if qubit >= MAX_QUBITS {
            return None;
        }
        let xb = self.x >> qubit & 1 == 1;
        let zb = self.z >> qubit & 1 == 1;
        match (xb, zb) {
            (true, false) => Some(Pauli::X),
            (true, true) => Some(Pauli::Y),
            (false, true) => Some(Pauli::Z),
            (false, false) => None,
        }
    }

    /// Non-identity letters in ascending qubit order.
    pub fn letters(&self) -> impl Iterator<Item = (usize, Pauli)> + '_ {
        let mut rest = self.support();
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let q = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some((q, self.letter(q).expect("bit set in support")))
        })
    }

    /// `self * other = phase * result`.
    pub fn mul(&self, other: &PauliString) -> (QuarterPhase, PauliString) {
        let (x1, z1, x2, z2) = (self.x, self.z, other.x, other.z);
        let (px1, py1, pz1) = (x1 & !z1, x1 & z1, z1 & !x1);
        let (px2, py2, pz2) = (x2 & !z2, x2 & z2, z2 & !x2);
        // XY = iZ, YZ = iX, ZX = iY and the reversed orders give -i.
        let plus = (px1 & py2) | (py1 & pz2) | (pz1 & px2);
        let minus = (py1 & px2) | (pz1 & py2) | (px1 & pz2);
        let k = plus.count_ones() + 3 * minus.count_ones();
        (QuarterPhase::new(k), PauliString { x: x1 ^ x2, z: z1 ^ z2 })
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            write!(f, "I")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (q, p) in self.letters() {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{}{}", p.as_char(), q)?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses `"X0 Y3 Z5"`; the empty string (or `"I"`) is the identity.
    fn from_str(s: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            if tok == "I" {
                continue;
            }
            let mut chars = tok.chars();
            let letter = match chars.next() {
                Some('X') => Pauli::X,
                Some('Y') => Pauli::Y,
                Some('Z') => Pauli::Z,
                _ => return Err(Error::Parse { line: 0, message: format!("bad Pauli token `{tok}`") }),
            };
            let q: usize = chars
                .as_str()
                .parse()
                .map_err(|_| Error::Parse { line: 0, message: format!("bad qubit index in `{tok}`") })?;
            letters.push((q, letter));
        }
        PauliString::from_letters(&letters)
    }
}

type TermMap = FxHashMap<PauliString, C64>;

/// Complex linear combination of Pauli strings on a fixed number of qubits.
#[derive(Clone, Debug)]
pub struct PauliSum {
    n_qubits: usize,
    terms: TermMap,
}

impl PartialEq for PauliSum {
    fn eq(&self, other: &Self) -> bool {
        self.n_qubits == other.n_qubits && self.terms == other.terms
    }
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        assert!(n_qubits <= MAX_QUBITS, "at most {MAX_QUBITS} qubits supported");
        PauliSum { n_qubits, terms: TermMap::default() }
    }

    pub fn identity(n_qubits: usize, coeff: C64) -> Self {
        let mut s = Self::zero(n_qubits);
        s.add_term(PauliString::IDENTITY, coeff);
        s
    }

    pub fn from_string(n_qubits: usize, string: PauliString, coeff: C64) -> Result<Self> {
        let mut s = Self::zero(n_qubits);
        s.insert(string, coeff)?;
        Ok(s)
    }

    /// Collects terms (merging duplicates) and simplifies at the default threshold.
    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, C64)>,
    {
        let mut s = Self::zero(n_qubits);
        for (p, c) in terms {
            s.insert(p, c)?;
        }
        Ok(s.simplify(DEFAULT_THRESHOLD))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, p: &PauliString) -> C64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &C64)> {
        self.terms.iter()
    }

    /// Terms in canonical (ascending string) order.
    pub fn sorted_terms(&self) -> Vec<(PauliString, C64)> {
        let mut v: Vec<_> = self.terms.iter().map(|(p, c)| (*p, *c)).collect();
        v.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        v
    }

    /// Adds `coeff * string`, checking that the string fits in `n_qubits`.
    pub fn insert(&mut self, string: PauliString, coeff: C64) -> Result<()> {
        if let Some(q) = string.max_qubit() {
            if q >= self.n_qubits {
                return Err(Error::QubitIndex { index: q, n_qubits: self.n_qubits });
            }
        }
        self.add_term(string, coeff);
        Ok(())
    }

    fn add_term(&mut self, string: PauliString, coeff: C64) {
        *self.terms.entry(string).or_default() += coeff;
    }

    fn check_dims(&self, other: &PauliSum) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension { expected: self.n_qubits, actual: other.n_qubits });
        }
        Ok(())
    }

    /// Merges like terms and drops coefficients with `|c| <= threshold`.
    pub fn simplify(mut self, threshold: f64) -> Self {
        self.terms.retain(|_, c| c.norm() > threshold);
        self
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_dims(other)?;
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(*p, *c);
        }
        Ok(out.simplify(DEFAULT_THRESHOLD))
    }

    pub fn sub(&self, other: &PauliSum) -> Result<PauliSum> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> PauliSum {
        let terms = self.terms.iter().map(|(p, v)| (*p, v * c)).collect();
        PauliSum { n_qubits: self.n_qubits, terms }.simplify(DEFAULT_THRESHOLD)
    }

    pub fn scale_real(&self, c: f64) -> PauliSum {
        self.scale(C64::new(c, 0.0))
    }

    /// Pauli strings are Hermitian, so the adjoint only conjugates coefficients.
    pub fn adjoint(&self) -> PauliSum {
        let terms = self.terms.iter().map(|(p, v)| (*p, v.conj())).collect();
        PauliSum { n_qubits: self.n_qubits, terms }
    }

    /// Exact operator product `self * other`, simplified at the default threshold.
    pub fn mul(&self, other: &PauliSum) -> Result<PauliSum> {
        self.mul_with_threshold(other, DEFAULT_THRESHOLD)
    }

    pub fn mul_with_threshold(&self, other: &PauliSum, threshold: f64) -> Result<PauliSum> {
        self.check_dims(other)?;
        let left = self.sorted_terms();
        let right = other.sorted_terms();
        let product_block = |block: &[(PauliString, C64)]| {
            let mut acc = TermMap::default();
            acc.reserve(block.len() * right.len());
            for (pa, ca) in block {
                for (pb, cb) in &right {
                    let (phase, p) = pa.mul(pb);
                    *acc.entry(p).or_default() += phase.apply(ca * cb);
                }
            }
            acc
        };
        let terms = if left.len() * right.len() < PARALLEL_PRODUCTS {
            product_block(&left)
        } else {
            // Fixed chunking and in-order merging keep results bit-reproducible.
            let chunk = left.len().div_ceil(64).max(1);
            let partial: Vec<TermMap> = left.par_chunks(chunk).map(product_block).collect();
            merge_in_order(partial)
        };
        Ok(PauliSum { n_qubits: self.n_qubits, terms }.simplify(threshold))
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_dims(other)?;
        let mut terms = TermMap::default();
        for (pa, ca) in &self.terms {
            for (pb, cb) in &other.terms {
                if pa.commutes_with(pb) {
                    continue;
                }
                // Anticommuting strings: [A, B] = 2AB.
                let (phase, p) = pa.mul(pb);
                *terms.entry(p).or_default() += phase.apply(ca * cb) * 2.0;
            }
        }
        Ok(PauliSum { n_qubits: self.n_qubits, terms }.simplify(DEFAULT_THRESHOLD))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    pub fn is_anti_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.re.abs() <= tol)
    }

    /// Sum of coefficient magnitudes; an upper bound on the operator norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Largest elementwise coefficient difference, treating missing terms as zero.
    pub fn max_coeff_diff(&self, other: &PauliSum) -> f64 {
        let mut d: f64 = 0.0;
        for (p, c) in &self.terms {
            d = d.max((c - other.coeff(p)).norm());
        }
        for (p, c) in &other.terms {
            if !self.terms.contains_key(p) {
                d = d.max(c.norm());
            }
        }
        d
    }

    /// Line-oriented text form: `<re> <im> <string>` per term, canonical order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (p, c) in self.sorted_terms() {
            if p.is_identity() {
                out.push_str(&format!("{:e} {:e}\n", c.re, c.im));
            } else {
                out.push_str(&format!("{:e} {:e} {}\n", c.re, c.im, p));
            }
        }
        out
    }

    /// Parses [`PauliSum::to_text`] output. Blank lines and `#` comments are skipped.
    pub fn from_text(text: &str, n_qubits: usize) -> Result<PauliSum> {
        let mut sum = PauliSum::zero(n_qubits);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: &str| Error::Parse { line: i + 1, message: m.to_string() };
            let mut parts = line.splitn(3, char::is_whitespace);
            let re: f64 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(|| err("bad real part"))?;
            let im: f64 = parts.next().and_then(|s| s.trim().parse().ok()).ok_or_else(|| err("bad imaginary part"))?;
            let string: PauliString = parts.next().unwrap_or("").parse().map_err(|e: Error| err(&e.to_string()))?;
            sum.insert(string, C64::new(re, im)).map_err(|e| err(&e.to_string()))?;
        }
        Ok(sum)
    }
}

fn merge_in_order(parts: Vec<TermMap>) -> TermMap {
    let mut iter = parts.into_iter();
    let mut acc = iter.next().unwrap_or_default();
    for part in iter {
        let mut keys: Vec<_> = part.into_iter().collect();
        keys.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        for (p, c) in keys {
            *acc.entry(p).or_default() += c;
        }
    }
    acc
}
