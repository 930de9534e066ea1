//! Seeded verification suites: ordering permutations, determinant-bound checks,
//! the sharpness witness and the bracket for the universal bound.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{covariance_det, sharpness_closed_form, BoundInstance, BoundPoint};
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64, ONE, ZERO};
use crate::modular::{ordering_from_ticks, Ordering};
use crate::mspace::{bk_matrix, TreeGraph};
use crate::spectral::{CutoffSpec, HermitianMatrix};
use crate::torus::{DiscreteTorus, TorusPoint};

/// Slack tolerance `-1e-10·max(1, bound)`.
pub fn slack_tolerance(bound: f64) -> f64 {
    -1e-10 * bound.max(1.0)
}

/// The ordering `π` of `α̃`, with `α_q` in `[0, β)`.
pub fn build_ordering_permutation(
    alphas: &[TorusPoint],
    order: usize,
    torus: &DiscreteTorus,
) -> Result<Ordering> {
    for &a in alphas {
        if !torus.in_half_open_period(a) {
            return Err(Error::OutsideHalfOpenPeriod {
                alpha: torus.alpha(a),
            });
        }
    }
    let ticks: Vec<i64> = alphas.iter().map(|p| p.tick()).collect();
    ordering_from_ticks(&ticks, order, torus.n())
}

/// Re-inspects both ordering conditions: `α̃` is nondecreasing along `π`, and
/// `π(k) < π(N + l)` whenever `α_k = α_{N+l}`.
pub fn ordering_conditions_hold(ordering: &Ordering, ticks: &[i64], order: usize) -> bool {
    let pi = &ordering.pi;
    let len = ticks.len();
    for q in 0..len {
        for r in 0..len {
            if pi.apply(q) < pi.apply(r) && ordering.shifted[q] > ordering.shifted[r] {
                return false;
            }
        }
    }
    for k in 0..order {
        for l in 0..order {
            if ticks[k] == ticks[order + l] && pi.apply(k) > pi.apply(order + l) {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorSource {
    RandomPsd,
    BkMatrix,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffKind {
    One,
    Indicator,
    Gaussian,
    Zero,
}

/// Parameters of the random instance generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub d_max: usize,
    pub m_max: usize,
    pub order_max: usize,
    pub n_choices: Vec<usize>,
    pub beta_choices: Vec<f64>,
    /// Largest eigenvalue magnitude in units of `β⁻¹n`.
    pub scale_max: f64,
    pub cutoffs: Vec<CutoffKind>,
    pub colors: ColorSource,
    /// Probability of pinning one eigenvalue at `β⁻¹n`.
    pub singular_prob: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            d_max: 3,
            m_max: 3,
            order_max: 3,
            n_choices: vec![2, 4, 8],
            beta_choices: vec![0.5, 1.0, 2.0],
            scale_max: 1e3,
            cutoffs: vec![CutoffKind::One, CutoffKind::Indicator, CutoffKind::Gaussian],
            colors: ColorSource::Mixed,
            singular_prob: 0.1,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if self.d_max == 0 || self.m_max == 0 || self.order_max == 0 {
            return bad("d_max, m_max and order_max must be positive");
        }
        if self.n_choices.is_empty() || self.n_choices.iter().any(|&n| n < 2 || n % 2 != 0) {
            return bad("n_choices must be nonempty even integers >= 2");
        }
        if self.beta_choices.is_empty()
            || self.beta_choices.iter().any(|b| !(b.is_finite() && *b > 0.0))
        {
            return bad("beta_choices must be nonempty positive reals");
        }
        if !(self.scale_max.is_finite() && self.scale_max > 0.0) {
            return bad("scale_max must be positive");
        }
        if self.cutoffs.is_empty() {
            return bad("cutoffs must be nonempty");
        }
        if !(0.0..=1.0).contains(&self.singular_prob) {
            return bad("singular_prob must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Per-instance seed derived from the suite seed.
pub fn instance_seed(base: u64, id: u64) -> u64 {
    let mut z = base ^ (id.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn complex_normal(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> CVec {
    CVec::from_fn(dim, |_, _| complex_normal(rng))
}

pub fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> CMat {
    let g = CMat::from_fn(dim, dim, |_, _| complex_normal(rng));
    g.qr().q()
}

/// `U diag(λ) U*` with Haar-ish `U`.
pub fn hermitian_with_spectrum(rng: &mut ChaCha8Rng, eigenvalues: &[f64]) -> Result<HermitianMatrix> {
    let u = random_unitary(rng, eigenvalues.len());
    let diag = CVec::from_iterator(eigenvalues.len(), eigenvalues.iter().map(|&l| C64::new(l, 0.0)));
    HermitianMatrix::new(&u * CMat::from_diagonal(&diag) * u.adjoint())
}

pub fn random_psd(rng: &mut ChaCha8Rng, m: usize) -> DMatrix<f64> {
    let k = rng.random_range(1..=m);
    let b = DMatrix::from_fn(m, k, |_, _| rng.sample::<f64, _>(StandardNormal));
    &b * b.transpose()
}

pub fn random_tree(rng: &mut ChaCha8Rng, m: usize) -> Result<TreeGraph> {
    let edges = (1..m)
        .map(|v| (rng.random_range(0..v), v, rng.random::<f64>()))
        .collect();
    TreeGraph::new(m, edges)
}

fn random_cutoff(rng: &mut ChaCha8Rng, kinds: &[CutoffKind], scale: f64) -> CutoffSpec {
    match kinds[rng.random_range(0..kinds.len())] {
        CutoffKind::One => CutoffSpec::One,
        CutoffKind::Zero => CutoffSpec::Zero,
        CutoffKind::Indicator => {
            let a = scale * rng.random_range(-1.0..1.0);
            let b = a + scale * rng.random_range(0.0..2.0);
            CutoffSpec::Indicator { a, b }
        }
        CutoffKind::Gaussian => CutoffSpec::Gaussian {
            center: scale * rng.random_range(-1.0..1.0),
            width: scale * rng.random_range(0.05..1.0),
        },
    }
}

/// One random instance, fully determined by `seed`.
pub fn generate_instance(config: &GeneratorConfig, seed: u64) -> Result<BoundInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.random_range(1..=config.d_max);
    let m = rng.random_range(1..=config.m_max);
    let order = rng.random_range(1..=config.order_max);
    let n = config.n_choices[rng.random_range(0..config.n_choices.len())];
    let beta = config.beta_choices[rng.random_range(0..config.beta_choices.len())];
    let torus = DiscreteTorus::new(beta, n)?;
    let unit = torus.inv_step();
    let log_max = config.scale_max.log10();
    let scale = unit * 10f64.powf(rng.random_range(-3.0..=log_max.max(-3.0)));
    let mut eigenvalues: Vec<f64> = (0..d).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
    if rng.random::<f64>() < config.singular_prob {
        eigenvalues[0] = unit;
    }
    let h = hermitian_with_spectrum(&mut rng, &eigenvalues)?;
    let chi = random_cutoff(&mut rng, &config.cutoffs, scale);
    let use_bk = match config.colors {
        ColorSource::RandomPsd => false,
        ColorSource::BkMatrix => true,
        ColorSource::Mixed => rng.random::<bool>(),
    };
    let colors = if use_bk {
        let tree = random_tree(&mut rng, m)?;
        bk_matrix(&tree, rng.random_range(0.05..=1.0))?
    } else {
        random_psd(&mut rng, m)
    };
    let points = (0..2 * order)
        .map(|_| BoundPoint {
            alpha: torus.point_from_tick(rng.random_range(0..n as i64)),
            phi: random_vector(&mut rng, d),
            color: rng.random_range(0..m),
        })
        .collect();
    BoundInstance::new(h, torus, chi, colors, points)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub instance_id: u64,
    pub seed: u64,
    pub d: usize,
    pub m: usize,
    pub order: usize,
    pub n: usize,
    pub beta: f64,
    pub det: C64,
    pub det_abs: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
    pub elapsed_s: f64,
}

pub fn check_instance(inst: &BoundInstance, instance_id: u64, seed: u64) -> Result<BoundReport> {
    let start = std::time::Instant::now();
    let det = covariance_det(inst, None)?;
    let bound = inst.bound();
    let slack = bound - det.norm();
    Ok(BoundReport {
        instance_id,
        seed,
        d: inst.h().dim(),
        m: inst.colors().nrows(),
        order: inst.order(),
        n: inst.torus().n(),
        beta: inst.torus().beta(),
        det,
        det_abs: det.norm(),
        bound,
        slack,
        pass: slack >= slack_tolerance(bound),
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}

/// `count` random instances; results are ordered by instance id.
pub fn bound_check_suite(count: u64, config: &GeneratorConfig, seed: u64) -> Result<Vec<BoundReport>> {
    config.validate()?;
    (0..count)
        .into_par_iter()
        .map(|id| {
            let s = instance_seed(seed, id);
            let inst = generate_instance(config, s)?;
            check_instance(&inst, id, s)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessReport {
    pub epsilon: f64,
    pub beta: f64,
    pub lambda: f64,
    pub n: usize,
    pub order: usize,
    pub det_abs: f64,
    pub lower_bound: f64,
    pub closed_form: f64,
    pub closed_form_rel_err: f64,
    pub pass: bool,
}

/// `λ < 0` with `1/(1+e^{βλ}) = 1 - ε/2`, then the least even `n` with `g_λ(0) ≥ 1 - ε`.
pub fn sharpness_point(epsilon: f64, beta: f64) -> Result<(f64, usize)> {
    if !(epsilon > 0.0 && epsilon < 1.0) || !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon = {epsilon} must lie in (0, 1) and beta = {beta} must be positive"
        )));
    }
    let lambda = (epsilon / (2.0 - epsilon)).ln() / beta;
    if lambda < -1e6 {
        return Err(Error::SearchFailure(format!(
            "lambda = {lambda} below -1e6 for epsilon = {epsilon}"
        )));
    }
    let target = 1.0 - epsilon;
    let g = |n: usize| -> Result<f64> {
        let t = DiscreteTorus::new(beta, n)?;
        Ok(sharpness_closed_form(lambda, &t, 1))
    };
    // g is increasing in n: double, then bisect over k = n/2
    let mut hi = 1usize;
    while g(2 * hi)? < target {
        if hi > 1 << 40 {
            return Err(Error::SearchFailure(format!(
                "no n below 2^41 reaches 1 - epsilon = {target}"
            )));
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if g(2 * mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lambda, 2 * hi))
}

/// The instance `H = λ𝟙_N`, all `α = 0`, `𝔐 = [1]`, `φ_k = φ_{N+k} = e_k`.
pub fn sharpness_instance(lambda: f64, torus: DiscreteTorus, order: usize) -> Result<BoundInstance> {
    let h = HermitianMatrix::from_real_diagonal(&vec![lambda; order])?;
    let e = |k: usize| CVec::from_fn(order, |i, _| if i == k { ONE } else { ZERO });
    let zero = torus.point_from_tick(0);
    let points = (0..2 * order)
        .map(|q| BoundPoint {
            alpha: zero,
            phi: e(q % order),
            color: 0,
        })
        .collect();
    BoundInstance::new(h, torus, CutoffSpec::One, DMatrix::from_element(1, 1, 1.0), points)
}

pub fn sharpness_sweep(epsilon: f64, beta: f64, orders: &[usize]) -> Result<Vec<SharpnessReport>> {
    let (lambda, n) = sharpness_point(epsilon, beta)?;
    let torus = DiscreteTorus::new(beta, n)?;
    orders
        .iter()
        .map(|&order| {
            let inst = sharpness_instance(lambda, torus, order)?;
            let det_abs = covariance_det(&inst, None)?.norm();
            let closed_form = sharpness_closed_form(lambda, &torus, order);
            let rel = (det_abs - closed_form.abs()).abs() / closed_form.abs().max(f64::MIN_POSITIVE);
            let lower_bound = (1.0 - epsilon).powi(2 * order as i32);
            Ok(SharpnessReport {
                epsilon,
                beta,
                lambda,
                n,
                order,
                det_abs,
                lower_bound,
                closed_form,
                closed_form_rel_err: rel,
                pass: det_abs >= lower_bound - 1e-12 && rel <= 1e-12,
            })
        })
        .collect()
}

/// Numerical bracket `[lower, upper]` for the universal determinant bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniversalBracket {
    pub lower: f64,
    pub upper: f64,
    pub epsilon: f64,
    pub bound_instances: usize,
    pub bound_violations: usize,
    pub pass: bool,
}

pub fn universal_bound_estimate(
    bounds: &[BoundReport],
    sharpness: &[SharpnessReport],
) -> Result<UniversalBracket> {
    if bounds.is_empty() || sharpness.is_empty() {
        return Err(Error::InvalidParameter("both suites must be nonempty".into()));
    }
    let lower = sharpness
        .iter()
        .map(|r| r.det_abs.powf(1.0 / (2.0 * r.order as f64)))
        .fold(0.0_f64, f64::max);
    let epsilon = sharpness.iter().map(|r| r.epsilon).fold(f64::INFINITY, f64::min);
    let violations = bounds.iter().filter(|r| !r.pass).count();
    let upper = bounds
        .iter()
        .filter(|r| r.bound > 0.0)
        .map(|r| (r.det_abs / r.bound).powf(1.0 / (2.0 * r.order as f64)))
        .fold(1.0_f64, f64::max);
    Ok(UniversalBracket {
        lower,
        upper,
        epsilon,
        bound_instances: bounds.len(),
        bound_violations: violations,
        pass: violations == 0 && lower >= 1.0 - epsilon - 1e-6,
    })
}
