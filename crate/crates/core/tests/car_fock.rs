mod common;

use common::*;
use fermicov::car_fock::{
    annihilate, create, expect_monomial, jordan_wigner, quasifree_density, second_quantize,
    wick_determinant, wick_from_symbol, FockOperator, FockSpace, MonomialSpec,
};
use fermicov::linalg::fermi;
use fermicov::perm::Permutation;
use fermicov::spectral::HermitianMatrix;
use fermicov::{CMat, CVec, C64};
use proptest::prelude::*;

fn identity(fock: FockSpace) -> FockOperator {
    FockOperator::identity(fock)
}

#[test]
fn single_mode() {
    let c = &jordan_wigner(1).unwrap()[0];
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    assert_eq!(c.matrix(), &CMat::from_row_slice(2, 2, &[z, o, z, z]));
    assert_eq!(c.anticommutator(&c.adjoint()), identity(c.fock()));
}

#[test]
fn three_mode_car_exact() {
    let cs = jordan_wigner(3).unwrap();
    let fock = cs[0].fock();
    let zero = FockOperator::zero(fock);
    for (i, ci) in cs.iter().enumerate() {
        for (j, cj) in cs.iter().enumerate() {
            assert_eq!(ci.anticommutator(cj), zero);
            let want = if i == j { identity(fock) } else { zero.clone() };
            assert_eq!(ci.anticommutator(&cj.adjoint()), want);
        }
    }
}

#[test]
fn annihilator_is_antilinear() {
    let fock = FockSpace::new(3).unwrap();
    let psi = random_cvec(&mut rng(41), 3);
    let i = C64::new(0.0, 1.0);
    let lhs = annihilate(fock, &(&psi * i)).unwrap();
    let rhs = annihilate(fock, &psi).unwrap().scale(-i);
    assert!((&lhs - &rhs).max_abs() < 1e-15);
}

#[test]
fn fock_cap_enforced() {
    assert!(FockSpace::new(0).is_err());
    assert!(jordan_wigner(15).is_err());
    assert!(FockSpace::new(14).is_err() || std::env::var("FERMICOV_FOCK_CAP").is_ok());
}

#[test]
fn number_operator_and_zero() {
    let fock = FockSpace::new(4).unwrap();
    let num = second_quantize(fock, &HermitianMatrix::from_real_diagonal(&[1.0; 4]).unwrap()).unwrap();
    for s in 0..fock.dim() {
        for t in 0..fock.dim() {
            let want = if s == t { (s as u32).count_ones() as f64 } else { 0.0 };
            assert_eq!(num.matrix()[(s, t)], C64::new(want, 0.0));
        }
    }
    let zero = second_quantize(fock, &HermitianMatrix::zeros(4)).unwrap();
    assert_eq!(zero, FockOperator::zero(fock));
    assert!(second_quantize(fock, &HermitianMatrix::zeros(3)).is_err());
}

#[test]
fn free_single_mode_state() {
    let s = quasifree_density(&HermitianMatrix::zeros(1), 1.0).unwrap();
    let half = C64::new(0.5, 0.0);
    let z = C64::new(0.0, 0.0);
    assert!((s.density() - CMat::from_row_slice(2, 2, &[half, z, z, half])).norm() < 1e-15);
    assert!((s.symbol()[(0, 0)] - half).norm() < 1e-15);
}

#[test]
fn symbol_and_gauge_invariance() {
    let mut r = rng(42);
    for d in 1..=3 {
        let h = random_hermitian(&mut r, d, 2.0);
        let beta = 0.7;
        let state = quasifree_density(&HermitianMatrix::new(h.clone()).unwrap(), beta).unwrap();
        let fock = state.fock();
        assert!((state.density().trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
        let s = matrix_fn(&h, |l| fermi(beta * l));
        assert!((state.symbol() - &s).norm() < 1e-12);
        for _ in 0..5 {
            let (p1, p2) = (random_cvec(&mut r, d), random_cvec(&mut r, d));
            let two = &create(fock, &p1).unwrap() * &annihilate(fock, &p2).unwrap();
            let want = p2.dotc(&(&s * &p1));
            assert!((state.expect(&two) - want).norm() < 1e-10 * p1.norm() * p2.norm());
            let pair = &create(fock, &p1).unwrap() * &create(fock, &p2).unwrap();
            assert!(state.expect(&pair).norm() < 1e-12 * p1.norm() * p2.norm());
        }
    }
}

#[test]
fn extreme_hamiltonian_stays_normalized() {
    let h = HermitianMatrix::from_real_diagonal(&[-1e5, 3e4, 0.0]).unwrap();
    let state = quasifree_density(&h, 50.0).unwrap();
    assert!((state.density().trace().re - 1.0).abs() < 1e-12);
    assert!(state.log_weights().iter().all(|w| w.is_finite()));
}

#[test]
fn two_point_and_odd_monomials() {
    let mut r = rng(43);
    let h = random_hermitian(&mut r, 3, 1.0);
    let state = quasifree_density(&HermitianMatrix::new(h).unwrap(), 1.0).unwrap();
    let psis: Vec<CVec> = (0..3).map(|_| random_cvec(&mut r, 3)).collect();
    let spec = MonomialSpec::new(1, 1, psis[..2].to_vec(), Permutation::identity(2)).unwrap();
    let direct = psis[1].dotc(&(state.symbol() * &psis[0]));
    assert!((expect_monomial(&state, &spec).unwrap() - direct).norm() < 1e-12);
    for pi in Permutation::all(3) {
        let odd = MonomialSpec::new(2, 1, psis.clone(), pi).unwrap();
        assert!(expect_monomial(&state, &odd).unwrap().norm() < 1e-12);
    }
    assert!(MonomialSpec::new(2, 2, psis, Permutation::identity(4)).is_err());
}

#[test]
fn swapped_two_point() {
    let mut r = rng(44);
    let h = random_hermitian(&mut r, 2, 1.0);
    let state = quasifree_density(&HermitianMatrix::new(h).unwrap(), 2.0).unwrap();
    let psis: Vec<CVec> = (0..2).map(|_| random_cvec(&mut r, 2)).collect();
    let swap = Permutation::from_images(vec![1, 0]).unwrap();
    let wick = wick_from_symbol(state.symbol(), &psis, &swap).unwrap();
    let want = psis[1].dotc(&(state.symbol() * &psis[0])) - psis[1].dotc(&psis[0]);
    assert!((wick - want).norm() < 1e-12);
    let spec = MonomialSpec::new(1, 1, psis.clone(), swap).unwrap();
    assert!((expect_monomial(&state, &spec).unwrap() - want).norm() < 1e-12);
    let id = wick_from_symbol(state.symbol(), &psis, &Permutation::identity(2)).unwrap();
    assert!((id - psis[1].dotc(&(state.symbol() * &psis[0]))).norm() < 1e-14);
    assert!(wick_determinant(|_, _, _| C64::new(1.0, 0.0), 2, &Permutation::identity(3)).is_err());
}

#[test]
fn wick_matches_fock_for_every_permutation() {
    let mut r = rng(45);
    for order in 1..=3usize {
        let d = 4;
        let h = random_hermitian(&mut r, d, 1.5);
        let state = quasifree_density(&HermitianMatrix::new(h).unwrap(), 1.0).unwrap();
        let draws = if order == 3 { 2 } else { 10 };
        for _ in 0..draws {
            let psis: Vec<CVec> = (0..2 * order).map(|_| random_cvec(&mut r, d)).collect();
            for pi in Permutation::all(2 * order) {
                let spec = MonomialSpec::new(order, order, psis.clone(), pi.clone()).unwrap();
                let fock = expect_monomial(&state, &spec).unwrap();
                let wick = wick_from_symbol(state.symbol(), &psis, &pi).unwrap();
                let scale: f64 = psis.iter().map(|p| p.norm()).product();
                assert!((fock - wick).norm() <= 1e-10 * fock.norm().max(1e-2 * scale));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn car_relations(d in 1usize..5, seed in any::<u64>()) {
        let mut r = rng(seed);
        let fock = FockSpace::new(d).unwrap();
        let (f, g) = (random_cvec(&mut r, d), random_cvec(&mut r, d));
        let (af, ag) = (annihilate(fock, &f).unwrap(), annihilate(fock, &g).unwrap());
        let tol = 1e-12 * f.norm() * g.norm();
        prop_assert!(af.anticommutator(&ag).max_abs() <= tol);
        let mixed = af.anticommutator(&create(fock, &g).unwrap());
        let want = identity(fock).scale(f.dotc(&g));
        prop_assert!((&mixed - &want).max_abs() <= tol);
    }

    #[test]
    fn second_quantization_commutator(d in 1usize..5, seed in any::<u64>()) {
        let mut r = rng(seed);
        let fock = FockSpace::new(d).unwrap();
        let h = random_hermitian(&mut r, d, 1.0);
        let psi = random_cvec(&mut r, d);
        let dg = second_quantize(fock, &HermitianMatrix::new(h.clone()).unwrap()).unwrap();
        prop_assert!((&dg - &dg.adjoint()).max_abs() < 1e-14);
        let lhs = dg.commutator(&create(fock, &psi).unwrap());
        let rhs = create(fock, &(&h * &psi)).unwrap();
        prop_assert!((&lhs - &rhs).max_abs() <= 1e-11 * psi.norm() * h.norm().max(1.0));
    }

    #[test]
    fn density_is_a_state(d in 1usize..5, beta in 0.1f64..5.0, seed in any::<u64>()) {
        let h = random_hermitian(&mut rng(seed), d, 3.0);
        let state = quasifree_density(&HermitianMatrix::new(h).unwrap(), beta).unwrap();
        prop_assert!((state.density().trace().re - 1.0).abs() < 1e-12);
        let eig = state.density().clone().symmetric_eigen();
        prop_assert!(eig.eigenvalues.min() > -1e-14);
    }
}
