//! Standard (Hilbert–Schmidt) representation of a faithful quasi-free state:
//! modular powers, correlation vectors on the tube, Schatten norms and the
//! modular representation of covariance determinants.

use crate::car_fock::{annihilate, create, quasifree_density, FockOperator, FockSpace, QuasiFreeState};
use crate::covariance::BoundInstance;
use crate::error::{Error, Result};
use crate::linalg::{kron, kron_vec, CMat, CVec, C64, ZERO};
use crate::mspace::quotient_space;
use crate::perm::Permutation;
use crate::spectral::{bernoulli_euler_f, sign_power, HermitianMatrix};

/// Exponentials above `e^690` are refused.
const LOG_OVERFLOW: f64 = 690.0;
const TUBE_SLACK: f64 = 1e-12;

/// An element of `𝔅(𝔽)` viewed as a vector with `⟨A, B⟩ = Tr(A*B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HSVector {
    fock: FockSpace,
    matrix: CMat,
}

impl HSVector {
    pub fn new(fock: FockSpace, matrix: CMat) -> Result<Self> {
        if matrix.shape() != (fock.dim(), fock.dim()) {
            return Err(Error::DimMismatch {
                expected: fock.dim(),
                got: matrix.nrows(),
            });
        }
        Ok(Self { fock, matrix })
    }

    pub fn from_operator(x: &FockOperator) -> Self {
        Self {
            fock: x.fock(),
            matrix: x.matrix().clone(),
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn fock(&self) -> FockSpace {
        self.fock
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// A faithful state together with the eigenbasis of its density matrix.
#[derive(Debug, Clone)]
pub struct ModularData {
    state: QuasiFreeState,
}

impl ModularData {
    pub fn new(state: QuasiFreeState) -> Result<Self> {
        if state.log_weights().iter().any(|l| !l.is_finite()) {
            return Err(Error::TraceUnderflow);
        }
        Ok(Self { state })
    }

    pub fn state(&self) -> &QuasiFreeState {
        &self.state
    }

    pub fn fock(&self) -> FockSpace {
        self.state.fock()
    }

    pub fn beta(&self) -> f64 {
        self.state.beta()
    }

    fn to_eigen(&self, x: &CMat) -> CMat {
        let v = self.state.eigenbasis();
        v.adjoint() * x * v
    }

    fn from_eigen(&self, x: &CMat) -> CMat {
        let v = self.state.eigenbasis();
        v * x * v.adjoint()
    }

    /// Diagonal of `Dρ^w` in the eigenbasis.
    fn power_diag(&self, w: C64) -> Result<Vec<C64>> {
        self.state
            .log_weights()
            .iter()
            .map(|&lp| {
                let log_mag = w.re * lp;
                if log_mag > LOG_OVERFLOW {
                    return Err(Error::OverflowGuard { log_magnitude: log_mag });
                }
                Ok((w * lp).exp())
            })
            .collect()
    }

    /// `Dρ^w`.
    pub fn density_power(&self, w: C64) -> Result<CMat> {
        let diag = self.power_diag(w)?;
        let v = self.state.eigenbasis();
        let mut scaled = v.clone();
        for (k, p) in diag.iter().enumerate() {
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= p);
        }
        Ok(scaled * v.adjoint())
    }

    /// `η = Dρ^{1/2}`.
    pub fn eta(&self) -> HSVector {
        HSVector {
            fock: self.fock(),
            matrix: self
                .density_power(C64::new(0.5, 0.0))
                .expect("nonnegative powers never overflow"),
        }
    }

    /// `Δ^z X = Dρ^z X Dρ^{-z}`, entrywise `(p_k / p_l)^z X_kl` in the eigenbasis.
    pub fn modular_power(&self, z: C64, x: &HSVector) -> Result<HSVector> {
        let mut xt = self.to_eigen(&x.matrix);
        let lp = self.state.log_weights();
        // entries below the roundoff of the basis change carry no information
        let floor = 8.0 * f64::EPSILON * xt.nrows() as f64 * x.matrix.norm();
        for k in 0..xt.nrows() {
            for l in 0..xt.ncols() {
                let v = xt[(k, l)];
                if v.norm() <= floor {
                    xt[(k, l)] = ZERO;
                    continue;
                }
                let e = z * (lp[k] - lp[l]);
                let log_mag = e.re + v.norm().ln();
                if log_mag > LOG_OVERFLOW {
                    return Err(Error::OverflowGuard { log_magnitude: log_mag });
                }
                xt[(k, l)] = v * e.exp();
            }
        }
        Ok(HSVector {
            fock: x.fock,
            matrix: self.from_eigen(&xt),
        })
    }

    /// `Δ^{z₁/β} x₁ ⋯ Δ^{z_N/β} x_N η = Dρ^{w₁} x₁ Dρ^{w₂} ⋯ x_N Dρ^{1/2 - Σw}`, `w = z/β`.
    pub fn correlation_vector(&self, chain: &[(C64, FockOperator)]) -> Result<HSVector> {
        let beta = self.beta();
        let mut total = 0.0;
        for (z, _) in chain {
            if z.re < -TUBE_SLACK {
                return Err(Error::TubeViolation {
                    reason: format!("Re z = {} < 0", z.re),
                });
            }
            total += z.re;
        }
        if total > beta / 2.0 + TUBE_SLACK {
            return Err(Error::TubeViolation {
                reason: format!("Σ Re z = {total} exceeds beta/2 = {}", beta / 2.0),
            });
        }
        let dim = self.fock().dim();
        let mut acc = CMat::identity(dim, dim);
        let mut wsum = C64::new(0.0, 0.0);
        for (z, x) in chain {
            let w = z / beta;
            wsum += w;
            scale_columns(&mut acc, &self.power_diag(w)?);
            acc *= self.to_eigen(x.matrix());
        }
        scale_columns(&mut acc, &self.power_diag(C64::new(0.5, 0.0) - wsum)?);
        Ok(HSVector {
            fock: self.fock(),
            matrix: self.from_eigen(&acc),
        })
    }
}

fn scale_columns(m: &mut CMat, diag: &[C64]) {
    for (k, p) in diag.iter().enumerate() {
        m.column_mut(k).iter_mut().for_each(|z| *z *= p);
    }
}

/// `(Tr|X|^s)^{1/s}`; `s = ∞` gives the operator norm.
pub fn schatten_norm(x: &CMat, s: f64) -> Result<f64> {
    if s.is_nan() || s < 1.0 {
        return Err(Error::InvalidSchattenExponent(s));
    }
    let sv = x.clone().svd(false, false).singular_values;
    if s.is_infinite() {
        return Ok(sv.iter().fold(0.0_f64, |a, &v| a.max(v)));
    }
    let top = sv.iter().fold(0.0_f64, |a, &v| a.max(v));
    if top == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = sv.iter().map(|v| (v / top).powf(s)).sum();
    Ok(top * sum.powf(1.0 / s))
}

/// Largest `η` keeping `β η ≤ 700`.
pub fn clamp_eta(beta: f64, eta: f64) -> f64 {
    eta.min(700.0 / beta)
}

/// The ordering of `2N` points used by the representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Ordering {
    /// `π`, mapping point index to sorted position.
    pub pi: Permutation,
    /// Shifted ticks `n α̃_q / β` of each point, in original order.
    pub shifted: Vec<i64>,
    /// First sorted position with `α̃ ≥ β/2` (`2N` if none).
    pub split: usize,
}

impl Ordering {
    /// Point index at sorted position `pos`, i.e. `π⁻¹(pos)`.
    pub fn at(&self, pos: usize) -> usize {
        self.pi.inverse().apply(pos)
    }

    /// `ξ` increments in ticks along the sorted order (`ξ_0 = 0`).
    pub fn increments(&self) -> Vec<i64> {
        let inv = self.pi.inverse();
        (0..self.shifted.len())
            .map(|pos| {
                if pos == 0 {
                    0
                } else {
                    self.shifted[inv.apply(pos)] - self.shifted[inv.apply(pos - 1)]
                }
            })
            .collect()
    }
}

/// Sort `α̃_q = α_q (+ n⁻¹β for q ≥ N)` stably; ties in `α̃` are broken by `α`, then by index.
pub fn ordering_from_ticks(ticks: &[i64], order: usize, n: usize) -> Result<Ordering> {
    if ticks.len() != 2 * order {
        return Err(Error::DimMismatch {
            expected: 2 * order,
            got: ticks.len(),
        });
    }
    if ticks.iter().any(|&t| t < 0 || t >= n as i64) {
        return Err(Error::InvalidParameter("points must lie in [0, beta)".into()));
    }
    let shifted: Vec<i64> = ticks
        .iter()
        .enumerate()
        .map(|(q, &t)| if q >= order { t + 1 } else { t })
        .collect();
    let mut idx: Vec<usize> = (0..ticks.len()).collect();
    idx.sort_by_key(|&q| (shifted[q], ticks[q], q));
    let mut images = vec![0; ticks.len()];
    for (pos, &q) in idx.iter().enumerate() {
        images[q] = pos;
    }
    let split = idx
        .iter()
        .position(|&q| 2 * shifted[q] >= n as i64)
        .unwrap_or(ticks.len());
    Ok(Ordering {
        pi: Permutation::from_images(images)?,
        shifted,
        split,
    })
}

struct Prepared {
    modular: ModularData,
    ordering: Ordering,
    ops: Vec<FockOperator>,
    sign: f64,
    n: usize,
}

fn prepare(inst: &BoundInstance, eta: f64) -> Result<Prepared> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::InvalidParameter(format!("eta = {eta} must be positive")));
    }
    let torus = inst.torus();
    let spectral = inst.spectral();
    let quotient = quotient_space(inst.colors())?;
    let r = quotient.rank();
    let d = spectral.dim();
    let fock = FockSpace::new(d * r)?;
    let eta = clamp_eta(torus.beta(), eta);
    let h_eta = spectral.matrix_function(|l| bernoulli_euler_f(l, torus, eta));
    let h_big = HermitianMatrix::new(kron(&h_eta, &CMat::identity(r, r)))?;
    let state = quasifree_density(&h_big, torus.beta())?;
    let modular = ModularData::new(state)?;

    let order = inst.order();
    let ticks: Vec<i64> = inst.points().iter().map(|p| p.alpha.tick()).collect();
    let ordering = ordering_from_ticks(&ticks, order, torus.n())?;
    let chi = inst.chi();
    let inv = ordering.pi.inverse();
    let mut ops = Vec::with_capacity(2 * order);
    for pos in 0..2 * order {
        let q = inv.apply(pos);
        let p = &inst.points()[q];
        let smoothed = spectral.apply(|l| chi.eval(l).sqrt(), &p.phi)?;
        let rotated: CVec = sign_power(spectral, torus, ordering.shifted[q], &smoothed)?;
        let psi = kron_vec(&rotated, &quotient.e(p.color));
        ops.push(if q < order {
            create(fock, &psi)?
        } else {
            annihilate(fock, &psi)?
        });
    }
    let reversal = if (order * order.saturating_sub(1) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    Ok(Prepared {
        modular,
        sign: ordering.pi.sign() * reversal,
        ordering,
        ops,
        n: torus.n(),
    })
}

/// `±⟨Δ^{1/2-a_{p-1}} x*_{p-1} ⋯ Δ^{ξ_2} x*_1 η, Δ^{a_p-1/2} x_p Δ^{ξ_{p+1}} ⋯ x_{2N} η⟩`.
pub fn determinant_representation(inst: &BoundInstance, eta: f64) -> Result<C64> {
    let prep = prepare(inst, eta)?;
    let beta = prep.modular.beta();
    let n = prep.n as f64;
    let a: Vec<f64> = (0..prep.ops.len())
        .map(|pos| prep.ordering.shifted[prep.ordering.at(pos)] as f64 / n)
        .collect();
    let p = prep.ordering.split;
    let mut left = Vec::with_capacity(p);
    for pos in (0..p).rev() {
        let w = if pos + 1 == p { 0.5 - a[pos] } else { a[pos + 1] - a[pos] };
        left.push((C64::new(w * beta, 0.0), prep.ops[pos].adjoint()));
    }
    let mut right = Vec::with_capacity(prep.ops.len() - p);
    for pos in p..prep.ops.len() {
        let w = if pos == p { a[pos] - 0.5 } else { a[pos] - a[pos - 1] };
        right.push((C64::new(w * beta, 0.0), prep.ops[pos].clone()));
    }
    let lhs = prep.modular.correlation_vector(&left)?;
    let rhs = prep.modular.correlation_vector(&right)?;
    Ok(lhs.inner(&rhs) * prep.sign)
}

/// Trace form `±Tr(Dρ^{a_1+1/2} x_1 Dρ^{ξ_2} ⋯ x_{2N} Dρ^{1/2-a_{2N}})`.
pub fn determinant_representation_trace(inst: &BoundInstance, eta: f64) -> Result<C64> {
    let prep = prepare(inst, eta)?;
    let n = prep.n as f64;
    let m = &prep.modular;
    let a: Vec<f64> = (0..prep.ops.len())
        .map(|pos| prep.ordering.shifted[prep.ordering.at(pos)] as f64 / n)
        .collect();
    let last = *a.last().expect("at least two points");
    let mut acc = m.density_power(C64::new(a[0] + 0.5, 0.0))?;
    for (pos, x) in prep.ops.iter().enumerate() {
        if pos > 0 {
            acc *= m.density_power(C64::new(a[pos] - a[pos - 1], 0.0))?;
        }
        acc *= x.matrix();
    }
    acc *= m.density_power(C64::new(0.5 - last, 0.0))?;
    Ok(acc.trace() * prep.sign)
}
