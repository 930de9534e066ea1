mod common;

use common::*;
use fermicov::mspace::{bk_matrix, quotient_space, TreeGraph};
use fermicov::verify::random_tree;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn max_dev(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

#[test]
fn identity_has_full_rank() {
    for m in 1..=5 {
        let q = quotient_space(&DMatrix::identity(m, m)).unwrap();
        assert_eq!(q.rank(), m);
        assert!(max_dev(&(q.coords() * q.coords().transpose()), &DMatrix::identity(m, m)) < 1e-14);
        assert!(max_dev(&(q.coords().transpose() * q.coords()), &DMatrix::identity(m, m)) < 1e-14);
    }
}

#[test]
fn all_ones_is_rank_one() {
    let ones = DMatrix::from_element(2, 2, 1.0);
    let q = quotient_space(&ones).unwrap();
    assert_eq!(q.rank(), 1);
    assert!((q.e(0)[0].abs() - 1.0).abs() < 1e-14);
    assert_eq!(q.e(0), q.e(1));
    assert!(max_dev(&q.gram(), &ones) < 1e-14);
}

#[test]
fn rejects_bad_color_matrices() {
    assert!(quotient_space(&DMatrix::zeros(3, 3)).is_err());
    let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
    assert!(quotient_space(&indefinite).is_err());
}

#[test]
fn single_edge() {
    for a in [0.0, 0.2, 0.75, 1.0] {
        let g = TreeGraph::new(2, vec![(0, 1, a)]).unwrap();
        let m = bk_matrix(&g, 1.0).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[1.0, 1.0 - a, 1.0 - a, 1.0]);
        assert!(max_dev(&m, &want) < 1e-15);
        let fine = bk_fine_grid(2, g.edges(), 1.0, 10_000);
        assert!(max_dev(&m, &fine) < 2e-4);
    }
}

#[test]
fn path_of_three() {
    let (a, b) = (0.3, 0.6);
    let g = TreeGraph::new(3, vec![(0, 1, a), (1, 2, b)]).unwrap();
    assert!(g.is_tree());
    let m = bk_matrix(&g, 1.0).unwrap();
    assert!((m[(0, 1)] - (1.0 - a)).abs() < 1e-15);
    assert!((m[(1, 2)] - (1.0 - b)).abs() < 1e-15);
    assert!((m[(0, 2)] - (1.0 - b)).abs() < 1e-15);
    let fine = bk_fine_grid(3, g.edges(), 1.0, 10_000);
    assert!(max_dev(&m, &fine) < 2e-4);
}

#[test]
fn zero_time_and_domain() {
    let g = random_tree(&mut rng(31), 5).unwrap();
    assert_eq!(bk_matrix(&g, 0.0).unwrap(), DMatrix::zeros(5, 5));
    assert!(bk_matrix(&g, 1.5).is_err());
    assert!(bk_matrix(&g, -0.1).is_err());
    assert!(TreeGraph::new(2, vec![(0, 1, 1.5)]).is_err());
    assert!(TreeGraph::new(2, vec![(0, 2, 0.5)]).is_err());
}

#[test]
fn tie_weights_and_cycles() {
    let g = TreeGraph::new(4, vec![(0, 1, 0.4), (1, 2, 0.4), (2, 3, 0.4), (3, 0, 0.1)]).unwrap();
    assert!(!g.is_tree());
    let m = bk_matrix(&g, 0.9).unwrap();
    let fine = bk_fine_grid(4, g.edges(), 0.9, 10_000);
    assert!(max_dev(&m, &fine) < 2e-4);
}

#[test]
fn random_trees_against_fine_grid() {
    let mut r = rng(32);
    for _ in 0..20 {
        let m = r.random_range(1..=6);
        let g = random_tree(&mut r, m).unwrap();
        let t = r.random_range(0.0..=1.0);
        let exact = bk_matrix(&g, t).unwrap();
        let fine = bk_fine_grid(m, g.edges(), t, 10_000);
        assert!(max_dev(&exact, &fine) < 2e-4);
    }
}

#[test]
fn bk_matrices_are_psd() {
    let mut r = rng(33);
    for _ in 0..500 {
        let m = r.random_range(1..=8);
        let g = random_tree(&mut r, m).unwrap();
        let t = r.random_range(0.0..=1.0);
        let mat = bk_matrix(&g, t).unwrap();
        let min = mat.symmetric_eigen().eigenvalues.min();
        assert!(min >= -1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bk_diagonal_and_monotone(seed in any::<u64>(), m in 1usize..8, t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0) {
        let g = random_tree(&mut rng(seed), m).unwrap();
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let a = bk_matrix(&g, lo).unwrap();
        let b = bk_matrix(&g, hi).unwrap();
        for k in 0..m {
            prop_assert!((a[(k, k)] - lo).abs() < 1e-14);
            for l in 0..m {
                prop_assert!(b[(k, l)] >= a[(k, l)] - 1e-15);
                prop_assert_eq!(a[(k, l)], a[(l, k)]);
            }
        }
    }

    #[test]
    fn quotient_reconstructs_and_is_idempotent(seed in any::<u64>(), m in 1usize..7, k in 1usize..7) {
        let mut r = rng(seed);
        let b = DMatrix::from_fn(m, k.min(m), |_, _| r.random_range(-1.0..1.0));
        let gram = &b * b.transpose();
        prop_assume!(gram.amax() > 1e-6);
        let q = quotient_space(&gram).unwrap();
        prop_assert!(q.rank() <= k.min(m));
        prop_assert!(max_dev(&q.gram(), &gram) <= 1e-10 * gram.amax().max(1.0));
        let again = quotient_space(&q.gram()).unwrap();
        prop_assert_eq!(again.rank(), q.rank());
        prop_assert!(max_dev(&again.gram(), &q.gram()) <= 1e-10 * gram.amax().max(1.0));
    }
}
