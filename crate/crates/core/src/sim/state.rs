use std::io::{Read, Write};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Desk-scale guard on dense statevectors.
pub const MAX_SIM_QUBITS: usize = 16;

/// Dense amplitude vector; qubit `q` is bit `q` of the basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

fn check_qubits(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_SIM_QUBITS {
        return Err(Error::Contract(format!("{n_qubits} qubits exceeds the {MAX_SIM_QUBITS}-qubit statevector limit")));
    }
    Ok(())
}

impl StateVector {
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::QubitIndex { index, n_qubits });
        }
        let mut amps = vec![C64::default(); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn from_reference(n_qubits: usize, reference: &ReferenceState) -> Result<Self> {
        let mut index = 0usize;
        for &q in &reference.occupied {
            if q >= n_qubits {
                return Err(Error::QubitIndex { index: q, n_qubits });
            }
            index |= 1 << q;
        }
        Self::basis(n_qubits, index)
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        check_qubits(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return Err(Error::Dimension { expected: n_qubits, actual: amps.len().trailing_zeros() as usize });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Domain("non-finite amplitude".into()));
        }
        Ok(StateVector { n_qubits, amps })
    }

    pub(crate) fn zeros_like(&self) -> Self {
        StateVector { n_qubits: self.n_qubits, amps: vec![C64::default(); self.amps.len()] }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Domain("cannot normalize a zero-norm state".into()));
        }
        Ok(self.scaled(1.0 / n))
    }

    pub fn scaled(&self, c: f64) -> Self {
        StateVector { n_qubits: self.n_qubits, amps: self.amps.iter().map(|a| a * c).collect() }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: C64, other: &StateVector) {
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += c * b;
        }
    }

    pub fn distance(&self, other: &StateVector) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    /// Little-endian dump: `u64` amplitude count, then `(re, im)` pairs of `f64`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.amps.len() as u64).to_le_bytes())?;
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let len = u64::from_le_bytes(word) as usize;
        if !len.is_power_of_two() {
            return Err(Error::Domain(format!("amplitude count {len} is not a power of two")));
        }
        let mut amps = Vec::with_capacity(len);
        for _ in 0..len {
            r.read_exact(&mut word)?;
            let re = f64::from_le_bytes(word);
            r.read_exact(&mut word)?;
            amps.push(C64::new(re, f64::from_le_bytes(word)));
        }
        Self::from_amplitudes(len.trailing_zeros() as usize, amps)
    }
}

/// Occupied spin-orbitals of a single determinant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReferenceState {
    pub occupied: Vec<usize>,
}

impl ReferenceState {
    pub fn new(occupied: Vec<usize>, n_electrons: usize) -> Result<Self> {
        if occupied.len() != n_electrons {
            return Err(Error::Contract(format!(
                "reference occupies {} orbitals for {n_electrons} electrons",
                occupied.len()
            )));
        }
        let mut sorted = occupied.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != occupied.len() {
            return Err(Error::Contract("reference occupation has repeated orbitals".into()));
        }
        Ok(ReferenceState { occupied })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_validation() {
        assert!(ReferenceState::new(vec![0, 1], 3).is_err());
        assert!(ReferenceState::new(vec![0, 0], 2).is_err());
        let r = ReferenceState::new(vec![0, 2], 2).unwrap();
        let s = StateVector::from_reference(4, &r).unwrap();
        assert_eq!(s.amplitudes()[0b0101], C64::new(1.0, 0.0));
    }

    #[test]
    fn qubit_guard() {
        assert!(StateVector::zero_state(17).is_err());
        assert!(StateVector::from_amplitudes(2, vec![C64::default(); 3]).is_err());
    }

    #[test]
    fn zero_norm_rejected() {
        let s = StateVector::from_amplitudes(1, vec![C64::default(); 2]).unwrap();
        assert!(matches!(s.normalized(), Err(Error::Domain(_))));
    }

    #[test]
    fn binary_round_trip() {
        let s = StateVector::from_amplitudes(2, (0..4).map(|i| C64::new(i as f64, -0.5 * i as f64)).collect()).unwrap();
        let mut buf = Vec::new();
        s.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 4 * 16);
        assert_eq!(StateVector::read_binary(buf.as_slice()).unwrap(), s);
    }
}
