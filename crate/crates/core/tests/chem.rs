mod common;

use adaft::bench::exact_singlet_energy;
use adaft::chem::{
    build_hamiltonian, excitations, fock_sector, hartree_fock_occupation, jordan_wigner, make_pool, number_operator,
    parse_fcidump, penalized_hamiltonian, s_squared, s_z, spin_orbital, FermionOperator, Ladder, MolecularSystem,
    PoolFlavor, Spin,
};
use adaft::sim::{expectation, subspace_eigensystem, StateVector};
use adaft::{Error, PauliString, PauliSum, C64};
use common::{dense, dense_annihilate, fixture, hf_reference, load, max_abs_diff, random_system, Dense};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Deserialize;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

fn jw(ops: Vec<Ladder>, n: usize) -> PauliSum {
    jordan_wigner(&FermionOperator::term(ops, ONE), n).unwrap()
}

/// Second-quantized H built directly on occupation bitstrings (alpha block then beta block),
/// diagonalized in the `(n_alpha, n_beta)` sector.
fn ci_ground_energy(sys: &MolecularSystem) -> f64 {
    let n = sys.n_orbitals;
    let so = |p: usize, s: usize| p + s * n;
    let dets: Vec<u64> = (0u64..1 << (2 * n))
        .filter(|b| {
            (b & ((1 << n) - 1)).count_ones() as usize == sys.n_alpha()
                && (b >> n).count_ones() as usize == sys.n_beta()
        })
        .collect();
    let index = |b: u64| dets.iter().position(|&d| d == b);
    let annihilate = |b: u64, p: usize| -> Option<(u64, f64)> {
        (b >> p & 1 == 1).then(|| (b & !(1 << p), if (b & ((1 << p) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 }))
    };
    let create = |b: u64, p: usize| -> Option<(u64, f64)> {
        (b >> p & 1 == 0).then(|| (b | (1 << p), if (b & ((1 << p) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 }))
    };
    let mut m = DMatrix::<f64>::zeros(dets.len(), dets.len());
    for (j, &b) in dets.iter().enumerate() {
        m[(j, j)] += sys.core_energy;
        for s in 0..2 {
            for p in 0..n {
                for q in 0..n {
                    let Some((b1, s1)) = annihilate(b, so(q, s)) else {
                        continue;
                    };
                    let Some((b2, s2)) = create(b1, so(p, s)) else {
                        continue;
                    };
                    m[(index(b2).unwrap(), j)] += sys.h1(p, q) * s1 * s2;
                }
            }
        }
        // 1/2 sum (pq|rs) a+_{p s} a+_{r t} a_{s t} a_{q s}
        for (s, t) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            for p in 0..n {
                for q in 0..n {
                    for r in 0..n {
                        for u in 0..n {
                            let v = sys.h2(p, q, r, u);
                            if v == 0.0 {
                                continue;
                            }
                            let Some((b1, s1)) = annihilate(b, so(q, s)) else {
                                continue;
                            };
                            let Some((b2, s2)) = annihilate(b1, so(u, t)) else {
                                continue;
                            };
                            let Some((b3, s3)) = create(b2, so(r, t)) else {
                                continue;
                            };
                            let Some((b4, s4)) = create(b3, so(p, s)) else {
                                continue;
                            };
                            m[(index(b4).unwrap(), j)] += 0.5 * v * s1 * s2 * s3 * s4;
                        }
                    }
                }
            }
        }
    }
    m.symmetric_eigenvalues().min()
}

fn lowest_in_sector(h: &PauliSum, sys: &MolecularSystem) -> f64 {
    let sector = fock_sector(sys.n_orbitals, sys.n_alpha(), sys.n_beta());
    subspace_eigensystem(h, &sector).unwrap()[0].0
}

#[test]
fn minimal_fcidump_fields() {
    let text = "&FCI NORB=1,NELEC=2,MS2=0,\n ORBSYM=1,\n ISYM=1,\n&END\n 0.5 1 1 1 1\n -1.0 1 1 0 0\n 0.7 0 0 0 0\n";
    let sys = parse_fcidump(text).unwrap();
    assert_eq!(sys.n_orbitals, 1);
    assert_eq!(sys.h1(0, 0), -1.0);
    assert_eq!(sys.h2(0, 0, 0, 0), 0.5);
    assert_eq!(sys.core_energy, 0.7);
    // Doubly occupied orbital: 2 h + (00|00) + core.
    assert!((ci_ground_energy(&sys) - (-2.0 + 0.5 + 0.7)).abs() < 1e-12);
    assert!((lowest_in_sector(&build_hamiltonian(&sys).unwrap(), &sys) - ci_ground_energy(&sys)).abs() < 1e-12);
}

#[test]
fn out_of_range_index_names_line() {
    let text = "&FCI NORB=4,NELEC=2,MS2=0,\n&END\n 0.1 1 1 1 1\n 0.2 5 1 1 1\n";
    match parse_fcidump(text) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn zero_integrals_give_constant() {
    let sys = MolecularSystem::new(2, 2, 0, 1.25).unwrap();
    let h = build_hamiltonian(&sys).unwrap();
    assert_eq!(h, PauliSum::identity(4, C64::new(1.25, 0.0)));
}

#[test]
fn number_operator_image() {
    let n0 = jw(vec![Ladder::create(0), Ladder::annihilate(0)], 1);
    let expect =
        PauliSum::from_terms(1, [(PauliString::IDENTITY, ONE * 0.5), ("Z0".parse().unwrap(), ONE * -0.5)]).unwrap();
    assert!(n0.max_coeff_diff(&expect) < 1e-15);
}

#[test]
fn single_excitation_generator_matches_ladder_matrices() {
    let t = FermionOperator::term(vec![Ladder::create(0), Ladder::annihilate(1)], ONE)
        .plus(FermionOperator::term(vec![Ladder::create(1), Ladder::annihilate(0)], -ONE));
    let q = jordan_wigner(&t, 2).unwrap();
    let (a0, a1) = (dense_annihilate(2, 0), dense_annihilate(2, 1));
    let oracle = a0.adjoint() * &a1 - a1.adjoint() * &a0;
    assert!(max_abs_diff(&dense(&q), &oracle) < 1e-14);
    let xy = PauliSum::from_terms(2, [("X0 Y1".parse().unwrap(), ONE), ("Y0 X1".parse().unwrap(), -ONE)]).unwrap();
    let half_i = xy.scale(C64::new(0.0, 0.5));
    assert!(q.max_coeff_diff(&half_i) < 1e-15 || q.max_coeff_diff(&half_i.scale_real(-1.0)) < 1e-15);
}

#[test]
fn anticommutation_relations() {
    for n in 1..=4 {
        let id = Dense::identity(1 << n, 1 << n);
        let zero = Dense::zeros(1 << n, 1 << n);
        for p in 0..n {
            let ap = dense(&jw(vec![Ladder::annihilate(p)], n));
            assert!(max_abs_diff(&ap, &dense_annihilate(n, p)) < 1e-14);
            for q in 0..n {
                let aq = dense(&jw(vec![Ladder::annihilate(q)], n));
                let cross = ap.adjoint() * &aq + &aq * ap.adjoint();
                assert!(max_abs_diff(&cross, if p == q { &id } else { &zero }) < 1e-10, "n={n} p={p} q={q}");
                assert!(max_abs_diff(&(&ap * &aq + &aq * &ap), &zero) < 1e-10);
            }
        }
    }
}

#[test]
fn jordan_wigner_is_linear() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..50 {
        let n = 4;
        let mut term = || {
            let k = rng.gen_range(1..=4);
            let ops = (0..k)
                .map(|_| {
                    let m = rng.gen_range(0..n);
                    if rng.gen() {
                        Ladder::create(m)
                    } else {
                        Ladder::annihilate(m)
                    }
                })
                .collect();
            FermionOperator::term(ops, ONE)
        };
        let (a, b) = (term(), term());
        let (x, y) = (C64::new(0.3, -1.1), C64::new(-0.7, 0.2));
        let lhs = jordan_wigner(&a.clone().scale(x).plus(b.clone().scale(y)), n).unwrap();
        let rhs = jordan_wigner(&a, n).unwrap().scale(x).add(&jordan_wigner(&b, n).unwrap().scale(y)).unwrap();
        assert!(lhs.max_coeff_diff(&rhs) < 1e-12);
    }
}

fn assert_symmetries(h: &PauliSum, n_orbitals: usize) {
    let nso = 2 * n_orbitals;
    for op in [number_operator(nso).unwrap(), s_z(n_orbitals).unwrap(), s_squared(n_orbitals).unwrap()] {
        let c = h.commutator(&op).unwrap();
        assert!(
            c.iter().all(|(_, z)| z.norm() < 1e-10),
            "max |[H, O]| = {}",
            c.iter().map(|(_, z)| z.norm()).fold(0.0, f64::max)
        );
    }
}

#[test]
fn hamiltonian_commutes_with_number_and_spin() {
    let (_, h) = load("h2/h2_r0.74.fcidump");
    assert_symmetries(&h, 2);
    let mut rng = StdRng::seed_from_u64(11);
    for n in 1..=4 {
        let sys = random_system(&mut rng, n, n);
        assert_symmetries(&build_hamiltonian(&sys).unwrap(), n);
    }
}

#[test]
fn determinant_oracle_matches_on_toys_and_h2() {
    let mut rng = StdRng::seed_from_u64(3);
    for (n, ne) in [(1, 1), (1, 2), (2, 2), (2, 3), (3, 2), (3, 4)] {
        let sys = random_system(&mut rng, n, ne);
        let h = build_hamiltonian(&sys).unwrap();
        assert!((lowest_in_sector(&h, &sys) - ci_ground_energy(&sys)).abs() < 1e-9, "n={n} ne={ne}");
    }
    let (sys, h) = load("h2/h2_r0.74.fcidump");
    let e = lowest_in_sector(&h, &sys);
    assert!((e - ci_ground_energy(&sys)).abs() < 1e-9);
    assert!((e - -1.137).abs() < 5e-4, "{e}");
}

#[derive(Deserialize)]
struct Sidecar {
    e_hf: f64,
    e_casci: f64,
}

#[test]
fn sidecar_energies_match_all_fixtures() {
    let mut checked = 0;
    for dir in ["h2", "lih", "h2o", "n2"] {
        let mut paths: Vec<_> = std::fs::read_dir(fixture(dir))
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|x| x == "fcidump"))
            .collect();
        paths.sort();
        for path in paths {
            let sys = MolecularSystem::from_path(&path).unwrap();
            let h = build_hamiltonian(&sys).unwrap();
            let side: Sidecar =
                serde_json::from_str(&std::fs::read_to_string(path.with_extension("oracle.json")).unwrap()).unwrap();
            let e = exact_singlet_energy(&sys, &h).unwrap();
            assert!((e - side.e_casci).abs() < 1e-8, "{}: {e} vs {}", path.display(), side.e_casci);
            let hf = StateVector::from_reference(h.n_qubits(), &hf_reference(&sys)).unwrap();
            assert!((expectation(&h, &hf).unwrap().re - side.e_hf).abs() < 1e-9, "{}", path.display());
            checked += 1;
        }
    }
    assert_eq!(checked, 2 + 2 + 18 + 17);
}

#[test]
fn spin_squared_examples() {
    let s2 = s_squared(2).unwrap();
    let (sys, _) = load("h2/h2_r0.74.fcidump");
    let hf = StateVector::from_reference(4, &hf_reference(&sys)).unwrap();
    assert!(expectation(&s2, &hf).unwrap().re.abs() < 1e-14);
    let up = StateVector::basis(4, 1 << spin_orbital(1, Spin::Alpha, 2)).unwrap();
    assert!((expectation(&s2, &up).unwrap().re - 0.75).abs() < 1e-14);
    assert!(s2.is_hermitian(1e-14));
}

#[test]
fn penalty_selects_singlet_for_stretched_h2() {
    let (sys, h) = load("h2/h2_r2.50.fcidump");
    let hs = penalized_hamiltonian(&h, 0.5).unwrap();
    assert!(hs.is_hermitian(1e-14));
    let sector = fock_sector(2, 1, 1);
    let (e, psi) = subspace_eigensystem(&hs, &sector).unwrap().remove(0);
    let s2 = expectation(&s_squared(2).unwrap(), &psi).unwrap().re;
    assert!(s2 < 1e-8, "{s2}");
    assert!((e - exact_singlet_energy(&sys, &h).unwrap()).abs() < 1e-8);
}

#[test]
fn penalized_water_ground_state_is_singlet() {
    let (sys, h) = load("h2o/h2o_r0.80.fcidump");
    let hs = penalized_hamiltonian(&h, 0.5).unwrap();
    let sector = fock_sector(sys.n_orbitals, sys.n_alpha(), sys.n_beta());
    let (_, psi) = subspace_eigensystem(&hs, &sector).unwrap().remove(0);
    assert!(expectation(&s_squared(sys.n_orbitals).unwrap(), &psi).unwrap().re < 1e-6);
}

#[test]
fn hartree_fock_fills_lowest_orbitals() {
    let (sys, _) = load("h2o/h2o_r1.00.fcidump");
    let mut occ = hartree_fock_occupation(&sys);
    occ.sort_unstable();
    let mut expect: Vec<usize> =
        (0..3).flat_map(|p| [spin_orbital(p, Spin::Alpha, 5), spin_orbital(p, Spin::Beta, 5)]).collect();
    expect.sort_unstable();
    assert_eq!(occ, expect);
}

/// Spin-preserving singles and doubles counted from spatial orbitals and spins alone.
fn brute_force_counts(n: usize) -> (usize, usize) {
    let nso = 2 * n;
    let spin = |i: usize| i % 2;
    let so: Vec<(usize, usize)> = (0..n).flat_map(|p| [(p, 0), (p, 1)]).collect();
    let singles =
        (0..nso).flat_map(|a| (0..nso).map(move |b| (a, b))).filter(|&(a, b)| a < b && spin(a) == spin(b)).count();
    let mut doubles = 0;
    for quad in (0..nso).flat_map(|a| (a + 1..nso).map(move |b| (a, b))) {
        for (c, d) in (0..nso).flat_map(|c| (c + 1..nso).map(move |d| (c, d))) {
            let (a, b) = quad;
            // Unordered pair-of-pairs {ab} -> {cd} with distinct indices, each partition counted once.
            if [a, b].contains(&c) || [a, b].contains(&d) || (a, b) >= (c, d) {
                continue;
            }
            if so[a].1 + so[b].1 == so[c].1 + so[d].1 {
                doubles += 1;
            }
        }
    }
    (singles, doubles)
}

#[test]
fn pool_sizes_match_enumeration() {
    for n in [2, 3, 6] {
        let (singles, doubles) = brute_force_counts(n);
        let f = make_pool(PoolFlavor::Fermionic, n).unwrap();
        let q = make_pool(PoolFlavor::QubitExcitation, n).unwrap();
        let p = make_pool(PoolFlavor::PauliString, n).unwrap();
        assert_eq!(f.len(), singles + doubles, "n={n}");
        assert_eq!(q.len(), f.len());
        assert_eq!(excitations(n).len(), f.len());
        let mut strings = std::collections::BTreeSet::new();
        for g in &q.generators {
            for (s, _) in g.iter() {
                strings.insert(*s);
            }
        }
        assert_eq!(p.len(), strings.len());
    }
    assert_eq!(make_pool(PoolFlavor::Fermionic, 6).unwrap().len(), 570);
}

#[test]
fn pool_generators_are_real_anti_hermitian() {
    for flavor in [PoolFlavor::Fermionic, PoolFlavor::QubitExcitation, PoolFlavor::PauliString] {
        for g in make_pool(flavor, 3).unwrap().generators {
            assert_eq!(g.adjoint(), g.scale_real(-1.0));
            for (s, c) in g.iter() {
                assert_eq!(s.y_count() % 2, 1, "{s}");
                assert_eq!(c.re, 0.0);
            }
        }
    }
}

#[test]
fn pauli_singles_on_a_same_spin_pair() {
    let pool = make_pool(PoolFlavor::PauliString, 2).unwrap();
    let (a, b) = (spin_orbital(0, Spin::Alpha, 2), spin_orbital(1, Spin::Alpha, 2));
    let on_pair: Vec<PauliString> = pool
        .generators
        .iter()
        .flat_map(|g| g.iter().map(|(s, _)| *s).collect::<Vec<_>>())
        .filter(|s| s.support() == (1 << a) | (1 << b))
        .collect();
    let x_y: PauliString = format!("X{a} Y{b}").parse().unwrap();
    let y_x: PauliString = format!("Y{a} X{b}").parse().unwrap();
    assert_eq!(on_pair.len(), 2);
    assert!(on_pair.contains(&x_y) && on_pair.contains(&y_x));
    // Opposite-spin pairs carry no single.
    let c = spin_orbital(0, Spin::Beta, 2);
    assert!(pool.generators.iter().all(|g| g.iter().all(|(s, _)| s.support() != (1 << a) | (1 << c))));
}
