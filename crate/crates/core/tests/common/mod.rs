#![allow(dead_code)]

use std::path::PathBuf;

use adaft::chem::{build_hamiltonian, hartree_fock_occupation, MolecularSystem};
use adaft::dressing::dress;
use adaft::pauli::DEFAULT_THRESHOLD;
use adaft::sim::{apply, expectation, ReferenceState, StateVector};
use adaft::{PauliString, PauliSum, C64};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub type Dense = DMatrix<C64>;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

pub fn load(rel: &str) -> (MolecularSystem, PauliSum) {
    let sys = MolecularSystem::from_path(fixture(rel)).unwrap();
    let h = build_hamiltonian(&sys).unwrap();
    (sys, h)
}

pub fn hf_reference(sys: &MolecularSystem) -> ReferenceState {
    ReferenceState::new(hartree_fock_occupation(sys), sys.n_electrons).unwrap()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn single(letter: char) -> Dense {
    match letter {
        'I' => Dense::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]),
        'X' => Dense::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        'Y' => Dense::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
        'Z' => Dense::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
        _ => unreachable!(),
    }
}

/// Kronecker product with qubit `n-1` leftmost, so qubit `q` is bit `q` of the basis index.
pub fn dense_string(n: usize, p: &PauliString) -> Dense {
    let mut m = Dense::from_element(1, 1, c(1., 0.));
    for q in (0..n).rev() {
        let letter = p.letter(q).map_or('I', |l| l.as_char());
        m = m.kronecker(&single(letter));
    }
    m
}

pub fn dense(op: &PauliSum) -> Dense {
    let dim = 1 << op.n_qubits();
    let mut m = Dense::zeros(dim, dim);
    for (p, coeff) in op.iter() {
        m += dense_string(op.n_qubits(), p) * *coeff;
    }
    m
}

/// Dense annihilation operator on mode `j` with a Jordan-Wigner Z string on modes below `j`.
pub fn dense_annihilate(n: usize, j: usize) -> Dense {
    let lower = Dense::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
    let mut m = Dense::from_element(1, 1, c(1., 0.));
    for q in (0..n).rev() {
        let f = if q == j {
            lower.clone()
        } else if q < j {
            single('Z')
        } else {
            single('I')
        };
        m = m.kronecker(&f);
    }
    m
}

pub fn max_abs_diff(a: &Dense, b: &Dense) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn column(s: &StateVector) -> DMatrix<C64> {
    DMatrix::from_column_slice(s.dim(), 1, s.amplitudes())
}

pub fn random_string<R: Rng>(rng: &mut R, n: usize) -> PauliString {
    let mask = (1u64 << n) - 1;
    PauliString::from_masks(rng.gen::<u64>() & mask, rng.gen::<u64>() & mask)
}

pub fn random_sum<R: Rng>(rng: &mut R, n: usize, max_terms: usize) -> PauliSum {
    let k = rng.gen_range(1..=max_terms);
    let terms: Vec<_> =
        (0..k).map(|_| (random_string(rng, n), c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).collect();
    PauliSum::from_terms(n, terms).unwrap()
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize, max_terms: usize) -> PauliSum {
    let s = random_sum(rng, n, max_terms);
    s.add(&s.adjoint()).unwrap().scale_real(0.5)
}

pub fn random_anti_hermitian<R: Rng>(rng: &mut R, n: usize, max_terms: usize) -> PauliSum {
    let s = random_sum(rng, n, max_terms);
    s.sub(&s.adjoint()).unwrap().scale_real(0.5)
}

pub fn random_state<R: Rng>(rng: &mut R, n: usize) -> StateVector {
    let amps = (0..1 << n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    StateVector::from_amplitudes(n, amps).unwrap().normalized().unwrap()
}

/// Largest |analytic - central difference| over random three-layer ansatze on the
/// penalized LiH Hamiltonian (12 qubits).
pub fn gradient_fd_error(flavor: adaft::adaptive::AnsatzFlavor, cases: usize, seed: u64) -> f64 {
    use adaft::adaptive::{AnsatzState, Layer, Objective, Problem};
    use adaft::chem::{make_pool, penalized_hamiltonian, PoolFlavor};

    let (sys, h) = load("lih/lih_r3.00.fcidump");
    let hs = penalized_hamiltonian(&h, 0.5).unwrap();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for pool_flavor in [PoolFlavor::Fermionic, PoolFlavor::QubitExcitation, PoolFlavor::PauliString] {
        let pool = make_pool(pool_flavor, sys.n_orbitals).unwrap();
        let problem = Problem::new(&hs, &pool, &hf_reference(&sys)).unwrap();
        for _ in 0..cases.div_ceil(3) {
            let mut ansatz = AnsatzState::new(flavor, problem.reference.clone());
            for _ in 0..3 {
                let k = rng.gen_range(1..=4);
                ansatz.layers.push(Layer {
                    ops: (0..k).map(|_| (rng.gen_range(0..pool.len()), rng.gen_range(-0.4..0.4))).collect(),
                });
            }
            let steps = ansatz.steps();
            let obj = Objective {
                h: &problem.h,
                generators: &problem.pool.generators,
                steps: &steps,
                reference: &problem.reference_state,
                n_free: ansatz.n_params(),
            };
            let x = ansatz.params();
            let grad = obj.evaluate(&x).unwrap().gradient;
            for i in 0..x.len() {
                let step = 1e-5;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += step;
                xm[i] -= step;
                let fd = (obj.evaluate(&xp).unwrap().energy - obj.evaluate(&xm).unwrap().energy) / (2.0 * step);
                worst = worst.max((fd - grad[i]).abs());
            }
        }
    }
    worst
}

/// Random real integrals on `n` spatial orbitals.
pub fn random_system(rng: &mut StdRng, n: usize, n_electrons: usize) -> MolecularSystem {
    let ms2 = (n_electrons % 2) as i32;
    let mut sys = MolecularSystem::new(n, n_electrons, ms2, rng.gen_range(-1.0..1.0)).unwrap();
    for p in 0..n {
        for q in 0..=p {
            sys.set_h1(p, q, rng.gen_range(-1.0..1.0));
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    sys.set_h2(p, q, r, s, rng.gen_range(-0.5..0.5));
                }
            }
        }
    }
    sys
}

/// `(1 + sum theta tau) s`.
pub fn linear(gens: &[PauliSum], thetas: &[f64], s: &StateVector) -> StateVector {
    let mut out = s.clone();
    for (g, t) in gens.iter().zip(thetas) {
        out.axpy(C64::new(*t, 0.0), &apply(g, s).unwrap());
    }
    out
}

/// Largest `|<Psi|H'|Psi> - <D Psi|H|D Psi>|` over random instances, plus whether every `H'` was Hermitian.
pub fn identity_check(cases: usize, seed: u64) -> (f64, bool) {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut hermitian = true;
    for _ in 0..cases {
        let n = rng.gen_range(2..=5);
        let h = random_hermitian(&mut rng, n, 10);
        let d = rng.gen_range(1..=4);
        let gens: Vec<PauliSum> = (0..d).map(|_| random_anti_hermitian(&mut rng, n, 3)).collect();
        let thetas: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let dressed = dress(&h, &gens, &thetas, DEFAULT_THRESHOLD).unwrap();
        hermitian &= dressed.is_hermitian(1e-12);
        let psi = random_state(&mut rng, n);
        let lhs = expectation(&dressed, &psi).unwrap().re;
        let rhs = expectation(&h, &linear(&gens, &thetas, &psi)).unwrap().re;
        worst = worst.max((lhs - rhs).abs());
    }
    (worst, hermitian)
}
