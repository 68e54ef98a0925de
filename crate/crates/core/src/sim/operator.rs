//! Pauli sums compiled for repeated statevector application.
//!
//! A string with masks `(x, z)` maps `|b>` to `i^{#Y} (-1)^{|b & z|} |b ^ x>`.
//! Terms are grouped by their `x` mask so each group is a diagonal matrix
//! followed by a fixed bit flip.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::state::StateVector;
use crate::error::{Error, Result};
use crate::pauli::{PauliSum, QuarterPhase};

/// Groups with at least this many strings get a precomputed diagonal.
const DENSE_GROUP: usize = 3;
/// Output block size for the gather loop.
const BLOCK: usize = 256;
/// Work (groups x dimension) above which application runs in parallel.
const PARALLEL_WORK: usize = 1 << 18;

#[derive(Clone, Debug)]
enum Diagonal {
    Dense(Vec<C64>),
    Sparse(Vec<(u64, C64)>),
}

#[derive(Clone, Debug)]
struct Group {
    x: u64,
    diag: Diagonal,
}

#[inline]
fn parity_sign(b: u64, z: u64) -> f64 {
    if (b & z).count_ones() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Debug)]
pub struct CompiledOperator {
    n_qubits: usize,
    groups: Vec<Group>,
}

impl CompiledOperator {
    pub fn new(op: &PauliSum) -> Self {
        let n = op.n_qubits();
        let dim = 1usize << n;
        let mut by_x: std::collections::BTreeMap<u64, Vec<(u64, C64)>> = Default::default();
        for (p, c) in op.sorted_terms() {
            let c = QuarterPhase::new(p.y_count()).apply(c);
            by_x.entry(p.x_mask()).or_default().push((p.z_mask(), c));
        }
        let groups = by_x
            .into_iter()
            .map(|(x, terms)| {
                let diag = if terms.len() >= DENSE_GROUP {
                    let v = (0..dim as u64).map(|b| terms.iter().map(|&(z, c)| c * parity_sign(b, z)).sum()).collect();
                    Diagonal::Dense(v)
                } else {
                    Diagonal::Sparse(terms)
                };
                Group { x, diag }
            })
            .collect();
        CompiledOperator { n_qubits: n, groups }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    fn apply_block(&self, input: &[C64], out: &mut [C64], start: usize) {
        for g in &self.groups {
            match &g.diag {
                Diagonal::Dense(f) => {
                    for (j, o) in out.iter_mut().enumerate() {
                        let b = (start + j) ^ g.x as usize;
                        *o += f[b] * input[b];
                    }
                }
                Diagonal::Sparse(terms) => {
                    for (j, o) in out.iter_mut().enumerate() {
                        let b = (start + j) ^ g.x as usize;
                        let amp = input[b];
                        for &(z, c) in terms {
                            *o += c * amp * parity_sign(b as u64, z);
                        }
                    }
                }
            }
        }
    }

    /// `out = op * input` on raw amplitude slices.
    pub fn apply_slice(&self, input: &[C64], out: &mut [C64]) {
        debug_assert_eq!(input.len(), out.len());
        out.fill(C64::default());
        let dim = input.len();
        let block = BLOCK.min(dim);
        if self.groups.len() * dim >= PARALLEL_WORK {
            out.par_chunks_mut(block).enumerate().for_each(|(i, chunk)| self.apply_block(input, chunk, i * block));
        } else {
            for (i, chunk) in out.chunks_mut(block).enumerate() {
                self.apply_block(input, chunk, i * block);
            }
        }
    }

    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        if s.n_qubits() != self.n_qubits {
            return Err(Error::Dimension { expected: self.n_qubits, actual: s.n_qubits() });
        }
        let mut out = s.zeros_like();
        self.apply_slice(s.amplitudes(), out.amplitudes_mut());
        Ok(out)
    }

    /// `<s|op|s>`, no normalization.
    pub fn braket(&self, s: &StateVector) -> Result<C64> {
        Ok(s.inner(&self.apply(s)?))
    }
}

/// `op * s`.
pub fn apply(op: &PauliSum, s: &StateVector) -> Result<StateVector> {
    CompiledOperator::new(op).apply(s)
}

fn check_norm(s: &StateVector) -> Result<f64> {
    let n = s.norm_sqr();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::Domain("zero-norm state".into()));
    }
    Ok(n)
}

/// `<s|op|s>` for a normalized state.
pub fn expectation(op: &PauliSum, s: &StateVector) -> Result<C64> {
    check_norm(s)?;
    CompiledOperator::new(op).braket(s)
}

/// `<s|op|s> / <s|s>`.
pub fn rayleigh_quotient(op: &PauliSum, s: &StateVector) -> Result<C64> {
    let n = check_norm(s)?;
    Ok(CompiledOperator::new(op).braket(s)? / n)
}

/// `<op^2> - <op>^2` in the normalized direction of `s`.
pub fn variance(op: &PauliSum, s: &StateVector) -> Result<f64> {
    variance_compiled(&CompiledOperator::new(op), s)
}

pub fn variance_compiled(op: &CompiledOperator, s: &StateVector) -> Result<f64> {
    let n = check_norm(s)?;
    let hs = op.apply(s)?;
    let e = s.inner(&hs) / n;
    let mut r = hs;
    r.axpy(-e, s);
    Ok(r.norm_sqr() / n)
}

/// Closed forms available for `exp(theta * g)`.
#[derive(Clone, Copy, Debug, PartialEq)]
enum ExpForm {
    /// `g^2 = -omega^2`: `cos(omega t) + sin(omega t)/omega g`.
    Involutory { omega: f64 },
    /// `g^3 = -omega^2 g`: `1 + sin(omega t)/omega g + (1 - cos(omega t))/omega^2 g^2`.
    Rotation { omega: f64 },
    /// Truncated Taylor series with substeps.
    Taylor { one_norm: f64 },
}

/// Taylor terms stop below this norm (relative to the input norm).
pub const TAYLOR_TOL: f64 = 1e-13;
pub const TAYLOR_MAX_TERMS: usize = 64;

/// Anti-Hermitian generator compiled for application and exponentiation.
#[derive(Clone, Debug)]
pub struct Generator {
    op: PauliSum,
    compiled: CompiledOperator,
    form: ExpForm,
}

impl Generator {
    pub fn new(op: PauliSum) -> Result<Self> {
        let scale = op.one_norm().max(1.0);
        if op.max_coeff_diff(&op.adjoint().scale_real(-1.0)) > 1e-12 * scale {
            return Err(Error::Contract("generator is not anti-Hermitian".into()));
        }
        let form = Self::classify(&op)?;
        let compiled = CompiledOperator::new(&op);
        Ok(Generator { op, compiled, form })
    }

    fn classify(op: &PauliSum) -> Result<ExpForm> {
        let one_norm = op.one_norm();
        if op.is_zero() {
            return Ok(ExpForm::Involutory { omega: 0.0 });
        }
        let tol = 1e-12 * one_norm.powi(3).max(1.0);
        let g2 = op.mul(op)?;
        if g2.term_count() == 1 {
            let c = g2.coeff(&crate::pauli::PauliString::IDENTITY);
            if c.re < 0.0 && c.im.abs() <= tol {
                return Ok(ExpForm::Involutory { omega: (-c.re).sqrt() });
            }
        }
        let g3 = g2.mul(op)?;
        let (p, c) = op.sorted_terms()[0];
        let ratio = -g3.coeff(&p) / c;
        if ratio.re > 0.0 && ratio.im.abs() <= tol && g3.max_coeff_diff(&op.scale(-ratio)) <= tol {
            return Ok(ExpForm::Rotation { omega: ratio.re.sqrt() });
        }
        Ok(ExpForm::Taylor { one_norm })
    }

    pub fn operator(&self) -> &PauliSum {
        &self.op
    }

    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        self.compiled.apply(s)
    }

    /// `exp(theta * g) s`.
    pub fn apply_exp(&self, theta: f64, s: &StateVector) -> Result<StateVector> {
        if theta == 0.0 {
            return Ok(s.clone());
        }
        match self.form {
            ExpForm::Involutory { omega } => {
                if omega == 0.0 {
                    return Ok(s.clone());
                }
                let mut out = s.scaled((omega * theta).cos());
                out.axpy(C64::new((omega * theta).sin() / omega, 0.0), &self.apply(s)?);
                Ok(out)
            }
            ExpForm::Rotation { omega } => {
                let g1 = self.apply(s)?;
                let g2 = self.apply(&g1)?;
                let (sin, cos) = (omega * theta).sin_cos();
                let mut out = s.clone();
                out.axpy(C64::new(sin / omega, 0.0), &g1);
                out.axpy(C64::new((1.0 - cos) / (omega * omega), 0.0), &g2);
                Ok(out)
            }
            ExpForm::Taylor { one_norm } => {
                let steps = (theta.abs() * one_norm).ceil().max(1.0) as usize;
                let h = theta / steps as f64;
                let mut out = s.clone();
                for _ in 0..steps {
                    out = self.taylor_step(h, &out)?;
                }
                Ok(out)
            }
        }
    }

    fn taylor_step(&self, h: f64, s: &StateVector) -> Result<StateVector> {
        let floor = TAYLOR_TOL * s.norm().max(f64::MIN_POSITIVE);
        let mut out = s.clone();
        let mut term = s.clone();
        for k in 1..=TAYLOR_MAX_TERMS {
            term = self.apply(&term)?.scaled(h / k as f64);
            out.axpy(C64::new(1.0, 0.0), &term);
            if term.norm() < floor {
                return Ok(out);
            }
        }
        Err(Error::Domain(format!("Taylor exponential did not converge in {TAYLOR_MAX_TERMS} terms")))
    }
}

/// `exp(theta * g) s` for an anti-Hermitian `g`.
pub fn apply_exp(theta: f64, g: &PauliSum, s: &StateVector) -> Result<StateVector> {
    Generator::new(g.clone())?.apply_exp(theta, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;

    fn sum(n: usize, terms: &[(&str, C64)]) -> PauliSum {
        PauliSum::from_terms(n, terms.iter().map(|(s, c)| (s.parse::<PauliString>().unwrap(), *c))).unwrap()
    }

    const ONE: C64 = C64 { re: 1.0, im: 0.0 };
    const I: C64 = C64 { re: 0.0, im: 1.0 };

    #[test]
    fn identity_and_bit_flip() {
        let s = StateVector::from_amplitudes(2, vec![ONE * 0.5, I * 0.5, ONE * -0.5, ONE * 0.5]).unwrap();
        assert_eq!(apply(&PauliSum::identity(2, ONE), &s).unwrap(), s);
        let flipped = apply(&sum(3, &[("X0", ONE)]), &StateVector::zero_state(3).unwrap()).unwrap();
        assert_eq!(flipped, StateVector::basis(3, 1).unwrap());
    }

    #[test]
    fn y_phases() {
        let y = sum(1, &[("Y0", ONE)]);
        assert_eq!(apply(&y, &StateVector::basis(1, 0).unwrap()).unwrap().amplitudes()[1], I);
        assert_eq!(apply(&y, &StateVector::basis(1, 1).unwrap()).unwrap().amplitudes()[0], -I);
    }

    #[test]
    fn z_expectation() {
        let e = expectation(&sum(1, &[("Z0", ONE)]), &StateVector::zero_state(1).unwrap()).unwrap();
        assert_eq!(e, ONE);
    }

    #[test]
    fn eigenstate_has_zero_variance() {
        let h = sum(2, &[("Z0", ONE), ("Z0 Z1", ONE * 0.3)]);
        assert!(variance(&h, &StateVector::basis(2, 2).unwrap()).unwrap().abs() < 1e-15);
        let plus = StateVector::from_amplitudes(1, vec![ONE * 0.5f64.sqrt(); 2]).unwrap();
        assert!((variance(&sum(1, &[("Z0", ONE)]), &plus).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_norm_domain_error() {
        let z = StateVector::from_amplitudes(1, vec![C64::default(); 2]).unwrap();
        assert!(matches!(expectation(&PauliSum::identity(1, ONE), &z), Err(Error::Domain(_))));
        assert!(rayleigh_quotient(&PauliSum::identity(1, ONE), &z).is_err());
    }

    #[test]
    fn rayleigh_divides_by_norm() {
        let s = StateVector::basis(1, 0).unwrap().scaled(3.0);
        assert!((rayleigh_quotient(&sum(1, &[("Z0", ONE)]), &s).unwrap() - ONE).norm() < 1e-15);
    }

    #[test]
    fn single_string_exponential() {
        let g = sum(2, &[("X0 Y1", I)]);
        let gen = Generator::new(g.clone()).unwrap();
        assert!(matches!(gen.form, ExpForm::Involutory { .. }));
        let s = StateVector::basis(2, 1).unwrap();
        let theta = 0.37;
        let out = gen.apply_exp(theta, &s).unwrap();
        let mut expect = s.scaled(theta.cos());
        expect.axpy(ONE * theta.sin(), &apply(&g, &s).unwrap());
        assert!(out.distance(&expect) < 1e-15);
        assert_eq!(gen.apply_exp(0.0, &s).unwrap(), s);
    }

    #[test]
    fn non_anti_hermitian_rejected() {
        assert!(matches!(Generator::new(sum(1, &[("X0", ONE)])), Err(Error::Contract(_))));
        assert!(apply_exp(0.1, &sum(1, &[("X0", ONE)]), &StateVector::zero_state(1).unwrap()).is_err());
    }

    #[test]
    fn rotation_matches_taylor() {
        let g = sum(2, &[("X0 Y1", I * 0.5), ("Y0 X1", I * -0.5)]);
        let gen = Generator::new(g.clone()).unwrap();
        assert!(matches!(gen.form, ExpForm::Rotation { .. }));
        let taylor = Generator { form: ExpForm::Taylor { one_norm: g.one_norm() }, ..gen.clone() };
        let s = StateVector::from_amplitudes(2, vec![ONE * 0.5, ONE * 0.5, I * 0.5, ONE * -0.5]).unwrap();
        for theta in [0.1, -1.3, 4.0] {
            let a = gen.apply_exp(theta, &s).unwrap();
            let b = taylor.apply_exp(theta, &s).unwrap();
            assert!(a.distance(&b) < 1e-12, "theta={theta}");
        }
    }

    #[test]
    fn dimension_error() {
        let op = CompiledOperator::new(&PauliSum::identity(2, ONE));
        assert!(op.apply(&StateVector::zero_state(3).unwrap()).is_err());
    }
}
