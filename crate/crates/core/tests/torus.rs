mod common;

use common::*;
use fermicov::torus::{
    convolve, delta_ap, derivative_matrix, derivative_spectrum, discrete_derivative, embed_vector,
    APFunction, DiscreteTorus,
};
use fermicov::{CVec, C64};
use proptest::prelude::*;

fn torus_strategy() -> impl Strategy<Value = DiscreteTorus> {
    (prop::sample::select(vec![0.5, 1.0, 2.0, 3.7]), 1usize..=8)
        .prop_map(|(beta, k)| DiscreteTorus::new(beta, 2 * k).unwrap())
}

fn random_ap(seed: u64, t: DiscreteTorus, d: usize) -> APFunction {
    let mut r = rng(seed);
    APFunction::from_half_period(t, d, |_| random_cvec(&mut r, d)).unwrap()
}

#[test]
fn delta_on_smallest_torus() {
    let t = DiscreteTorus::new(1.0, 2).unwrap();
    let d = delta_ap(&t);
    let at = |a: f64| d.scalar_at(t.point_at(a).unwrap()).re;
    assert_eq!(at(0.5), 0.0);
    assert_eq!(at(1.0), -1.0);
    assert_eq!(at(-0.5), 0.0);
    assert_eq!(at(0.0), 1.0);
    assert!(d.is_antiperiodic());
}

#[test]
fn delta_norm_and_peak() {
    for (beta, n) in [(1.0, 2), (2.0, 4), (0.5, 8), (3.0, 16)] {
        let t = DiscreteTorus::new(beta, n).unwrap();
        let d = delta_ap(&t);
        let norm2 = d.inner(&d).unwrap().re;
        assert!((norm2 - n as f64 / beta / 2.0).abs() < 1e-13 * norm2);
    }
    let t = DiscreteTorus::new(2.0, 4).unwrap();
    let d = delta_ap(&t);
    assert_eq!(d.scalar_at(t.point_at(0.0).unwrap()).re, 1.0);
    assert_eq!(d.scalar_at(t.point_at(2.0).unwrap()).re, -1.0);
}

#[test]
fn convolution_against_double_sum() {
    let t = DiscreteTorus::new(1.5, 6).unwrap();
    let c = C64::new(0.7, -0.2);
    let g = APFunction::scalar_from_half_period(t, |_| c);
    let conv = convolve(&g, &g).unwrap();
    let pts: Vec<_> = t.points().collect();
    for &a in &pts {
        let mut acc = C64::new(0.0, 0.0);
        for &tau in &pts {
            let mut diff = t.alpha(a) - t.alpha(tau);
            if diff <= -1.5 + 1e-9 {
                diff += 3.0;
            } else if diff > 1.5 + 1e-9 {
                diff -= 3.0;
            }
            let wrapped = if diff > 1e-9 { -c } else { c };
            acc += wrapped * g.scalar_at(tau);
        }
        acc *= t.step();
        assert!((conv.scalar_at(a) - acc).norm() < 1e-13);
    }
    let zero = APFunction::zeros(t, 1);
    assert_eq!(convolve(&g, &zero).unwrap().max_abs(), 0.0);
}

#[test]
fn derivative_of_constant_and_of_half() {
    let t = DiscreteTorus::new(1.0, 8).unwrap();
    let c = C64::new(0.5, 0.0);
    let g0 = APFunction::scalar_from_half_period(t, |_| c);
    let dg = discrete_derivative(&g0);
    let delta = delta_ap(&t);
    for p in t.points() {
        assert!((dg.scalar_at(p) + delta.scalar_at(p) * 2.0).norm() < 1e-14);
    }
    let dense = derivative_matrix(&t);
    let coords = g0.to_reduced();
    for (i, v) in dg.to_reduced().iter().enumerate() {
        let want: C64 = (0..t.n()).map(|j| coords[j] * dense[(i, j)]).sum();
        assert!((v - want).norm() < 1e-13);
    }
}

#[test]
fn derivative_gap_is_positive() {
    for n in [2usize, 4, 8] {
        let t = DiscreteTorus::new(1.0, n).unwrap();
        let eig = derivative_matrix(&t).complex_eigenvalues();
        let gap = eig.iter().map(|z| z.im.abs()).fold(f64::INFINITY, f64::min);
        assert!(gap > 0.0);
        let want = n as f64 * (std::f64::consts::PI / n as f64).sin();
        assert!((gap - want).abs() < 1e-9);
        let closed = derivative_spectrum(&t);
        for z in &eig {
            assert!(closed.iter().any(|w| (w - z).norm() < 1e-9));
        }
    }
}

#[test]
fn embedding_isometry_examples() {
    let t = DiscreteTorus::new(1.0, 8).unwrap();
    let e1 = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let hat = embed_vector(&e1, &t);
    assert!((hat.inner(&hat).unwrap().re - 4.0).abs() < 1e-14);
    assert_eq!(embed_vector(&CVec::zeros(3), &t).max_abs(), 0.0);
}

#[test]
fn off_grid_and_odd_n_rejected() {
    assert!(DiscreteTorus::new(1.0, 3).is_err());
    assert!(DiscreteTorus::new(-1.0, 4).is_err());
    let t = DiscreteTorus::new(1.0, 4).unwrap();
    assert!(t.point_at(0.1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn operations_preserve_antiperiodicity(t in torus_strategy(), d in 1usize..4, seed in any::<u64>()) {
        let f = random_ap(seed, t, d);
        prop_assert!(f.is_antiperiodic());
        prop_assert!(discrete_derivative(&f).is_antiperiodic());
        prop_assert!(convolve(&f, &delta_ap(&t)).unwrap().is_antiperiodic());
        let a = random_hermitian(&mut rng(seed ^ 1), d, 1.0);
        prop_assert!(f.apply_fiberwise(&a).unwrap().is_antiperiodic());
    }

    #[test]
    fn fiberwise_commutes_with_derivative(t in torus_strategy(), d in 1usize..5, seed in any::<u64>()) {
        let f = random_ap(seed, t, d);
        let a = random_hermitian(&mut rng(seed.wrapping_add(7)), d, 3.0);
        let lhs = discrete_derivative(&f.apply_fiberwise(&a).unwrap());
        let rhs = discrete_derivative(&f).apply_fiberwise(&a).unwrap();
        let scale = f.norm() * t.inv_step() * a.norm();
        prop_assert!(lhs.sub(&rhs).unwrap().norm() <= 1e-12 * scale);
    }

    #[test]
    fn delta_is_convolution_unit(t in torus_strategy(), d in 1usize..4, seed in any::<u64>()) {
        let g = random_ap(seed, t, d);
        let out = convolve(&g, &delta_ap(&t)).unwrap();
        prop_assert!(out.sub(&g).unwrap().max_abs() <= 1e-13 * g.max_abs());
    }

    #[test]
    fn embedding_scales_inner_product(t in torus_strategy(), d in 1usize..5, seed in any::<u64>()) {
        let mut r = rng(seed);
        let (x, y) = (random_cvec(&mut r, d), random_cvec(&mut r, d));
        let got = embed_vector(&x, &t).inner(&embed_vector(&y, &t)).unwrap();
        let want = x.dotc(&y) * (t.inv_step() / 2.0);
        prop_assert!((got - want).norm() <= 1e-13 * want.norm().max(1.0));
    }

    #[test]
    fn tick_arithmetic_wraps(t in torus_strategy(), a in -40i64..40, b in -40i64..40) {
        let (p, q) = (t.reduce(a), t.reduce(b));
        prop_assert_eq!(t.add(p, q), t.reduce(a + b));
        prop_assert_eq!(t.sub(t.add(p, q), q), p);
        prop_assert_eq!(t.point_of_index(t.index(p)), p);
    }
}
