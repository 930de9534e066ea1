//! Independent brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use fermicov::{CMat, CVec, C64};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cnormal(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_cvec(rng: &mut ChaCha8Rng, d: usize) -> CVec {
    CVec::from_fn(d, |_, _| cnormal(rng))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| cnormal(rng));
    (&g + g.adjoint()) * C64::new(0.5 * scale, 0.0)
}

pub fn rel_err(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(a.norm()).max(f64::MIN_POSITIVE)
}

/// `f(H)` by a fresh eigendecomposition, without the library's calculus.
pub fn matrix_fn(h: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let eig = SymmetricEigen::new(h.clone());
    let d = h.nrows();
    let mut out = CMat::zeros(d, d);
    for j in 0..d {
        let v = eig.eigenvectors.column(j);
        out += v * v.adjoint() * C64::new(f(eig.eigenvalues[j]), 0.0);
    }
    out
}

/// `∂ ⊗ 1 + 1 ⊗ H` on the half period `(-β, 0]`, blocks indexed by `tick + n - 1`.
/// The step past `α = 0` lands on `n⁻¹β = (n⁻¹β - β) + β`, hence the sign flip.
pub fn dense_generator(beta: f64, n: usize, h: &CMat) -> CMat {
    let d = h.nrows();
    let c = n as f64 / beta;
    let mut m = CMat::zeros(n * d, n * d);
    for i in 0..n {
        for a in 0..d {
            m[(i * d + a, i * d + a)] -= C64::new(c, 0.0);
            if i + 1 < n {
                m[(i * d + a, (i + 1) * d + a)] += C64::new(c, 0.0);
            } else {
                m[(i * d + a, a)] -= C64::new(c, 0.0);
            }
            for b in 0..d {
                m[(i * d + a, i * d + b)] += h[(a, b)];
            }
        }
    }
    m
}

/// Read the block at tick `t ∈ (-n, n]` of a half-period vector, using antiperiodicity.
pub fn block_at(v: &CVec, n: usize, d: usize, tick: i64) -> CVec {
    let (idx, sign) = if tick <= 0 {
        (tick + n as i64 - 1, 1.0)
    } else {
        (tick - 1, -1.0)
    };
    let i = idx as usize;
    CVec::from_fn(d, |a, _| v[i * d + a] * sign)
}

/// `g = (𝔡 + λ)⁻¹(-2δ_ap)` on all `2n` ticks, ordered from `-n+1` to `n`.
pub fn dense_kernel(lambda: f64, beta: f64, n: usize) -> Vec<f64> {
    let h = CMat::from_element(1, 1, C64::new(lambda, 0.0));
    let m = dense_generator(beta, n, &h);
    let mut rhs = CVec::zeros(n);
    rhs[n - 1] = C64::new(-2.0 * n as f64 / (2.0 * beta), 0.0);
    let g = m.lu().solve(&rhs).expect("𝔡 + λ is invertible");
    (-(n as i64) + 1..=n as i64)
        .map(|t| block_at(&g, n, 1, t)[0].re)
        .collect()
}

/// `⟨φ₂, (-2(∂ + Ĥ)⁻¹ χ(Ĥ) φ̂₁)(α)⟩` by dense inversion.
pub fn dense_covariance_entry(
    beta: f64,
    n: usize,
    h: &CMat,
    chi_h: &CMat,
    phi1: &CVec,
    phi2: &CVec,
    tick: i64,
) -> C64 {
    let d = h.nrows();
    let m = dense_generator(beta, n, h);
    let mut rhs = CVec::zeros(n * d);
    let src = chi_h * phi1 * C64::new(n as f64 / (2.0 * beta), 0.0);
    for a in 0..d {
        rhs[(n - 1) * d + a] = src[a];
    }
    let sol = m.lu().solve(&rhs).expect("∂ + Ĥ is invertible") * C64::new(-2.0, 0.0);
    phi2.dotc(&block_at(&sol, n, d, tick))
}

/// Fine-grid midpoint integration of the connectivity indicator, using BFS.
pub fn bk_fine_grid(m: usize, edges: &[(usize, usize, f64)], t: f64, samples: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m, m);
    let ds = t / samples as f64;
    for k in 0..samples {
        let s = (k as f64 + 0.5) * ds;
        for start in 0..m {
            let mut seen = vec![false; m];
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(v) = stack.pop() {
                for &(a, b, w) in edges {
                    if w >= s {
                        continue;
                    }
                    let other = if a == v {
                        b
                    } else if b == v {
                        a
                    } else {
                        continue;
                    };
                    if !seen[other] {
                        seen[other] = true;
                        stack.push(other);
                    }
                }
            }
            for (l, &on) in seen.iter().enumerate() {
                if on {
                    out[(start, l)] += ds;
                }
            }
        }
    }
    out
}

/// Every permutation (as `images[q] = position`) satisfying both ordering conditions.
pub fn brute_force_orderings(ticks: &[i64], order: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    let len = ticks.len();
    let shifted: Vec<i64> = (0..len)
        .map(|q| ticks[q] + i64::from(q >= order))
        .collect();
    (0..len)
        .permutations(len)
        .filter(|images| {
            let sorted = (0..len).all(|q| {
                (0..len).all(|r| !(images[q] < images[r] && shifted[q] > shifted[r]))
            });
            let ties = (0..order).all(|k| {
                (0..order).all(|l| ticks[k] != ticks[order + l] || images[k] < images[order + l])
            });
            sorted && ties
        })
        .collect()
}
