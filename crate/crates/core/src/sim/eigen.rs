//! Exact eigenpairs of Hermitian Pauli sums.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rustc_hash::FxHashMap;

use super::operator::CompiledOperator;
use super::state::{StateVector, MAX_SIM_QUBITS};
use crate::error::{Error, Result};
use crate::pauli::{PauliSum, QuarterPhase};

/// Full dense diagonalization up to this many qubits; Lanczos beyond.
pub const DENSE_MAX_QUBITS: usize = 10;
/// Required residual `|H psi - E psi|` of a returned ground state.
pub const RESIDUAL_TOL: f64 = 1e-9;

fn check_hermitian(h: &PauliSum) -> Result<()> {
    if !h.is_hermitian(1e-12 * h.one_norm().max(1.0)) {
        return Err(Error::Contract("operator is not Hermitian".into()));
    }
    if h.n_qubits() > MAX_SIM_QUBITS {
        return Err(Error::Contract(format!("{} qubits exceeds the simulation limit", h.n_qubits())));
    }
    Ok(())
}

/// Matrix of `h` restricted to the computational basis states `basis`.
fn projected_matrix(h: &PauliSum, basis: &[usize]) -> DMatrix<C64> {
    let position: FxHashMap<usize, usize> = basis.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let mut m = DMatrix::<C64>::zeros(basis.len(), basis.len());
    for (p, c) in h.sorted_terms() {
        let c = QuarterPhase::new(p.y_count()).apply(c);
        for (col, &b) in basis.iter().enumerate() {
            if let Some(&row) = position.get(&(b ^ p.x_mask() as usize)) {
                let sign = if (b as u64 & p.z_mask()).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                m[(row, col)] += c * sign;
            }
        }
    }
    m
}

/// All eigenpairs of `h` within the span of `basis`, ascending in energy.
/// Eigenvectors are embedded in the full `2^n` space.
pub fn subspace_eigensystem(h: &PauliSum, basis: &[usize]) -> Result<Vec<(f64, StateVector)>> {
    check_hermitian(h)?;
    if basis.is_empty() {
        return Err(Error::Domain("empty basis".into()));
    }
    let n = h.n_qubits();
    let eig = projected_matrix(h, basis).symmetric_eigen();
    let mut order: Vec<usize> = (0..basis.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order
        .into_iter()
        .map(|k| {
            let mut amps = vec![C64::default(); 1 << n];
            for (i, &b) in basis.iter().enumerate() {
                amps[b] = eig.eigenvectors[(i, k)];
            }
            Ok((eig.eigenvalues[k], fix_phase(StateVector::from_amplitudes(n, amps)?)))
        })
        .collect()
}

/// Rotates the global phase so the largest amplitude is real and positive.
fn fix_phase(s: StateVector) -> StateVector {
    let big = s.amplitudes().iter().copied().max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr())).unwrap_or_default();
    if big.norm() == 0.0 {
        return s;
    }
    let phase = big.conj() / big.norm();
    let amps = s.amplitudes().iter().map(|a| a * phase).collect();
    StateVector::from_amplitudes(s.n_qubits(), amps).expect("same dimension")
}

/// Lowest eigenpair of `h` over the full Hilbert space.
pub fn exact_ground_state(h: &PauliSum) -> Result<(f64, StateVector)> {
    check_hermitian(h)?;
    let n = h.n_qubits();
    let (e, psi) = if n <= DENSE_MAX_QUBITS {
        let basis: Vec<usize> = (0..1 << n).collect();
        subspace_eigensystem(h, &basis)?.swap_remove(0)
    } else {
        lanczos_ground(&CompiledOperator::new(h), None)?
    };
    let r = residual(&CompiledOperator::new(h), e, &psi)?;
    if r > RESIDUAL_TOL {
        return Err(Error::Domain(format!("ground state residual {r:e} above tolerance")));
    }
    Ok((e, psi))
}

pub fn residual(h: &CompiledOperator, e: f64, psi: &StateVector) -> Result<f64> {
    let mut r = h.apply(psi)?;
    r.axpy(C64::new(-e, 0.0), psi);
    Ok(r.norm())
}

/// Restarted Lanczos with full reorthogonalization.
pub fn lanczos_ground(h: &CompiledOperator, start: Option<&StateVector>) -> Result<(f64, StateVector)> {
    let n = h.n_qubits();
    let dim = 1usize << n;
    let krylov = dim.min(120);
    let mut v0 = match start {
        Some(s) => s.normalized()?,
        None => {
            // Deterministic start with support on every basis state.
            let amps = (0..dim).map(|i| C64::new(1.0 + 1e-3 * (i % 17) as f64, 0.0)).collect();
            StateVector::from_amplitudes(n, amps)?.normalized()?
        }
    };
    let mut best = (f64::INFINITY, v0.clone());
    for _restart in 0..50 {
        let mut basis: Vec<StateVector> = vec![v0.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        for j in 0..krylov {
            let mut w = h.apply(&basis[j])?;
            let a = basis[j].inner(&w).re;
            alpha.push(a);
            for _ in 0..2 {
                for b in &basis {
                    let c = b.inner(&w);
                    w.axpy(-c, b);
                }
            }
            let nb = w.norm();
            if nb < 1e-12 || j + 1 == krylov {
                break;
            }
            beta.push(nb);
            basis.push(w.scaled(1.0 / nb));
        }
        let m = alpha.len();
        let t = DMatrix::<f64>::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = t.symmetric_eigen();
        let k = (0..m).min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b])).expect("nonempty");
        let coeffs: DVector<f64> = eig.eigenvectors.column(k).into_owned();
        let mut ritz = basis[0].zeros_like();
        for (c, b) in coeffs.iter().zip(&basis) {
            ritz.axpy(C64::new(*c, 0.0), b);
        }
        let ritz = ritz.normalized()?;
        let e = h.braket(&ritz)?.re;
        best = (e, ritz.clone());
        if residual(h, e, &ritz)? < 0.1 * RESIDUAL_TOL {
            break;
        }
        v0 = ritz;
    }
    Ok((best.0, fix_phase(best.1)))
}
