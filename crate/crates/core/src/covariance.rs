//! Resolvent kernels `g_λ`, covariance entries and determinants, the Gram
//! divergence demonstrator and the decay parameter.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{inner, kron, real_to_complex, spectral_norm, CMat, CVec, C64, ZERO};
use crate::spectral::{
    bernoulli_euler_f, eig_hermitian, is_singular, sign_e, CutoffSpec, HermitianMatrix,
    SpectralData,
};
use crate::torus::{delta_ap, derivative_matrix, discrete_derivative, APFunction, DiscreteTorus, TorusPoint};

/// `g_λ` tabulated on the whole torus (storage order).
#[derive(Debug, Clone, PartialEq)]
pub struct KernelEval {
    pub lambda: f64,
    pub torus: DiscreteTorus,
    pub eta: Option<f64>,
    values: Vec<f64>,
}

impl KernelEval {
    pub fn at(&self, p: TorusPoint) -> f64 {
        self.values[self.torus.index(p)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_ap(&self) -> APFunction {
        APFunction::scalar_from_half_period(self.torus, |p| C64::new(self.at(p), 0.0))
    }
}

/// `g_λ(α)` for `α ∈ (-β, 0]` given by its tick `m ∈ (-n, 0]`.
fn kernel_half(lambda: f64, torus: &DiscreteTorus, eta: Option<f64>, m: i64) -> f64 {
    let n = torus.n() as i64;
    let e = 1 - m; // β⁻¹n(n⁻¹β - α), an integer in 1..=n
    if is_singular(lambda, torus) && eta.is_none() {
        return if e == n { 1.0 } else { 0.0 };
    }
    let f = bernoulli_euler_f(lambda, torus, eta.unwrap_or(1.0));
    let sign = if e % 2 == 0 { 1.0 } else { sign_e(lambda, torus) };
    let ehf = e as f64 * torus.step() * f;
    let t = torus.beta() * f;
    let mag = if t > 0.0 {
        (ehf - t).exp() / (1.0 + (-t).exp())
    } else {
        ehf.exp() / (1.0 + t.exp())
    };
    sign * mag
}

/// Single value `g_λ(α)` at any grid point.
pub fn kernel_value(lambda: f64, torus: &DiscreteTorus, eta: Option<f64>, p: TorusPoint) -> f64 {
    let n = torus.n() as i64;
    if p.tick() <= 0 {
        kernel_half(lambda, torus, eta, p.tick())
    } else {
        -kernel_half(lambda, torus, eta, p.tick() - n)
    }
}

/// The kernel `g_λ`; with `eta = None` and `λ = β⁻¹n` the closed limit is used.
pub fn kernel_g(lambda: f64, torus: &DiscreteTorus, eta: Option<f64>) -> Result<KernelEval> {
    if let Some(e) = eta {
        if !(e.is_finite() && e > 0.0) {
            return Err(Error::InvalidParameter(format!("eta = {e} must be positive")));
        }
    }
    let n = torus.n();
    let mut values = vec![0.0; 2 * n];
    for i in 0..n {
        let v = kernel_half(lambda, torus, eta, torus.point_of_index(i).tick());
        values[i] = v;
        values[i + n] = -v;
    }
    Ok(KernelEval {
        lambda,
        torus: *torus,
        eta,
        values,
    })
}

/// `max_α |𝔡g(α) + λg(α) + 2δ_ap(α)|`.
pub fn kernel_residual(k: &KernelEval) -> f64 {
    let g = k.to_ap();
    let dg = discrete_derivative(&g);
    let delta = delta_ap(&k.torus);
    k.torus
        .points()
        .map(|p| {
            (dg.scalar_at(p) + g.scalar_at(p) * k.lambda + delta.scalar_at(p) * 2.0).norm()
        })
        .fold(0.0, f64::max)
}

/// `e^{-αλ} / (1 + e^{βλ})` for `α ∈ (-β, 0]`.
pub fn kernel_g_continuum(lambda: f64, beta: f64, alpha: f64) -> Result<f64> {
    if !(alpha > -beta && alpha <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} outside (-beta, 0]"
        )));
    }
    let t = beta * lambda;
    Ok(if t > 0.0 {
        (-alpha * lambda - t).exp() / (1.0 + (-t).exp())
    } else {
        (-alpha * lambda).exp() / (1.0 + t.exp())
    })
}

/// `⟨φ₂, (C_H χ(Ĥ) φ̂₁)(α)⟩ = Σ_j g_{λ_j}(α) χ(λ_j) ⟨φ₂, v_j⟩⟨v_j, φ₁⟩`.
pub fn covariance_entry(
    h: &SpectralData,
    chi: &CutoffSpec,
    phi1: &CVec,
    phi2: &CVec,
    alpha: TorusPoint,
    torus: &DiscreteTorus,
    eta: Option<f64>,
) -> Result<C64> {
    for phi in [phi1, phi2] {
        if phi.len() != h.dim() {
            return Err(Error::DimMismatch {
                expected: h.dim(),
                got: phi.len(),
            });
        }
    }
    let mut acc = ZERO;
    for (j, &l) in h.eigenvalues().iter().enumerate() {
        let c = chi.eval(l);
        if c == 0.0 {
            continue;
        }
        let v = h.eigenvectors().column(j);
        let w = v.dotc(phi1) * phi2.dotc(&v);
        acc += w * (kernel_value(l, torus, eta, alpha) * c);
    }
    Ok(acc)
}

/// One `(α_q, φ_q, j_q)` triple; `color` is 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundPoint {
    pub alpha: TorusPoint,
    pub phi: CVec,
    pub color: usize,
}

#[derive(Debug, Clone)]
pub struct BoundInstance {
    h: HermitianMatrix,
    spectral: SpectralData,
    torus: DiscreteTorus,
    chi: CutoffSpec,
    colors: DMatrix<f64>,
    points: Vec<BoundPoint>,
}

/// Symmetric PSD check shared by instance validation.
pub(crate) fn check_psd(m: &DMatrix<f64>, tol: f64) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::DimMismatch {
            expected: m.nrows().max(1),
            got: m.ncols(),
        });
    }
    let scale = m.amax();
    let defect = (m - m.transpose()).amax();
    if defect > 1e-12 * scale.max(1.0) {
        return Err(Error::NotSymmetric { defect });
    }
    if scale == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let min = m.clone().symmetric_eigenvalues().min();
    if min < -tol * scale.max(1.0) {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    Ok(())
}

impl BoundInstance {
    pub fn new(
        h: HermitianMatrix,
        torus: DiscreteTorus,
        chi: CutoffSpec,
        colors: DMatrix<f64>,
        points: Vec<BoundPoint>,
    ) -> Result<Self> {
        chi.validate()?;
        check_psd(&colors, 1e-10)?;
        if points.is_empty() || points.len() % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "need 2N > 0 points, got {}",
                points.len()
            )));
        }
        for p in &points {
            if !torus.in_half_open_period(p.alpha) {
                return Err(Error::OutsideHalfOpenPeriod {
                    alpha: torus.alpha(p.alpha),
                });
            }
            if p.phi.len() != h.dim() {
                return Err(Error::DimMismatch {
                    expected: h.dim(),
                    got: p.phi.len(),
                });
            }
            if p.color >= colors.nrows() {
                return Err(Error::InvalidParameter(format!(
                    "colour index {} outside 0..{}",
                    p.color,
                    colors.nrows()
                )));
            }
        }
        let spectral = eig_hermitian(&h)?;
        Ok(Self {
            h,
            spectral,
            torus,
            chi,
            colors,
            points,
        })
    }

    pub fn h(&self) -> &HermitianMatrix {
        &self.h
    }

    pub fn spectral(&self) -> &SpectralData {
        &self.spectral
    }

    pub fn torus(&self) -> &DiscreteTorus {
        &self.torus
    }

    pub fn chi(&self) -> &CutoffSpec {
        &self.chi
    }

    pub fn colors(&self) -> &DMatrix<f64> {
        &self.colors
    }

    pub fn points(&self) -> &[BoundPoint] {
        &self.points
    }

    /// Half the number of points.
    pub fn order(&self) -> usize {
        self.points.len() / 2
    }

    /// `Π_q ‖√χ(H) φ_q‖ 𝔐_{j_q j_q}^{1/2}`.
    pub fn bound(&self) -> f64 {
        self.points
            .iter()
            .map(|p| {
                let coeffs = self.spectral.eigenvectors().adjoint() * &p.phi;
                let norm2: f64 = coeffs
                    .iter()
                    .zip(self.spectral.eigenvalues())
                    .map(|(c, &l)| self.chi.eval(l) * c.norm_sqr())
                    .sum();
                (norm2 * self.colors[(p.color, p.color)].max(0.0)).sqrt()
            })
            .product()
    }
}

/// The `N × N` matrix `𝔐_{j_k j_{N+l}} ⟨φ_{N+l}, (C_H χ(Ĥ) φ̂_k)(α_k - α_{N+l})⟩`.
pub fn covariance_matrix(inst: &BoundInstance, eta: Option<f64>) -> Result<CMat> {
    let n = inst.order();
    let tor = inst.torus();
    let mut m = CMat::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            let pk = &inst.points[k];
            let pl = &inst.points[n + l];
            let entry = covariance_entry(
                &inst.spectral,
                &inst.chi,
                &pk.phi,
                &pl.phi,
                tor.sub(pk.alpha, pl.alpha),
                tor,
                eta,
            )?;
            m[(k, l)] = entry * inst.colors[(pk.color, pl.color)];
        }
    }
    Ok(m)
}

pub fn covariance_det(inst: &BoundInstance, eta: Option<f64>) -> Result<C64> {
    Ok(covariance_matrix(inst, eta)?.determinant())
}

/// `g_λ(0) = (1 - n⁻¹βλ)⁻¹ (1 + |1 - n⁻¹βλ|⁻ⁿ)⁻¹`.
pub fn sharpness_kernel_at_zero(lambda: f64, torus: &DiscreteTorus) -> f64 {
    let x = 1.0 - torus.step() * lambda;
    if is_singular(lambda, torus) {
        return 0.0;
    }
    let ax = x.abs();
    let n = torus.n() as i32;
    if ax < 1.0 {
        let p = ax.powi(n);
        p / (x * (1.0 + p))
    } else {
        1.0 / (x * (1.0 + ax.powi(-n)))
    }
}

/// Closed form of the sharpness determinant, `g_λ(0)^N`.
pub fn sharpness_closed_form(lambda: f64, torus: &DiscreteTorus, order: usize) -> f64 {
    sharpness_kernel_at_zero(lambda, torus).powi(order as i32)
}

/// Dense `C_H = -2(∂ + Ĥ)⁻¹` in half-period coordinates (`n·d` square, index `t·d + c`).
pub fn covariance_operator_matrix(h: &HermitianMatrix, torus: &DiscreteTorus) -> Result<CMat> {
    let d = h.dim();
    let dm = real_to_complex(&derivative_matrix(torus));
    let op = kron(&dm, &CMat::identity(d, d)) + kron(&CMat::identity(torus.n(), torus.n()), h.matrix());
    let inv = op.try_inverse().ok_or_else(|| {
        Error::InvalidParameter("∂ + Ĥ is singular on this torus".into())
    })?;
    Ok(inv * C64::new(-2.0, 0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramRow {
    pub n: usize,
    /// Operator norm of `C_H`.
    pub c_norm: f64,
    /// `‖ê₁‖`.
    pub e1_norm: f64,
    /// Per-factor Gram estimate `‖C_H‖^{1/2} ‖ê₁‖`.
    pub gram_factor: f64,
    /// `‖-2(∂ + λ_j)⁻¹‖` for each eigenvalue of `H`.
    pub per_eigenvalue: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramDemo {
    pub rows: Vec<GramRow>,
    pub has_zero_mode: bool,
    pub c_norm_exponent: f64,
    pub e1_norm_exponent: f64,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Growth of `‖C_H‖` and `‖ê₁‖` along a list of tori.
pub fn gram_norm_demo(h: &HermitianMatrix, tori: &[DiscreteTorus]) -> Result<GramDemo> {
    if tori.len() < 2 {
        return Err(Error::InvalidParameter("need at least two tori".into()));
    }
    let spectral = eig_hermitian(h)?;
    let has_zero_mode = spectral.eigenvalues().iter().any(|l| l.abs() <= 1e-9);
    let mut rows = Vec::with_capacity(tori.len());
    for tor in tori {
        let c = covariance_operator_matrix(h, tor)?;
        let e1 = CVec::from_fn(h.dim(), |i, _| if i == 0 { C64::new(1.0, 0.0) } else { ZERO });
        let hat = crate::torus::embed_vector(&e1, tor);
        let spectrum = crate::torus::derivative_spectrum(tor);
        let per_eigenvalue = spectral
            .eigenvalues()
            .iter()
            .map(|&l| {
                let gap = spectrum.iter().map(|z| (z + l).norm()).fold(f64::INFINITY, f64::min);
                2.0 / gap
            })
            .collect();
        let c_norm = spectral_norm(&c);
        rows.push(GramRow {
            n: tor.n(),
            c_norm,
            e1_norm: hat.norm(),
            gram_factor: c_norm.sqrt() * hat.norm(),
            per_eigenvalue,
        });
    }
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let cs: Vec<f64> = rows.iter().map(|r| r.c_norm).collect();
    let es: Vec<f64> = rows.iter().map(|r| r.e1_norm).collect();
    Ok(GramDemo {
        c_norm_exponent: loglog_slope(&ns, &cs),
        e1_norm_exponent: loglog_slope(&ns, &es),
        rows,
        has_zero_mode,
    })
}

/// Finite-`n` snapshot of the decay parameter:
/// `max_𝔦 n⁻¹β Σ_τ Σ_q |⟨φ_q, (C_H χ(Ĥ) φ̂_𝔦)(τ)⟩|`.
pub fn decay_parameter(
    h: &SpectralData,
    chi: &CutoffSpec,
    basis: &[CVec],
    torus: &DiscreteTorus,
) -> Result<f64> {
    let mut defect: f64 = 0.0;
    for (i, u) in basis.iter().enumerate() {
        for (j, v) in basis.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((inner(u, v) - target).norm());
        }
    }
    if defect > 1e-10 {
        return Err(Error::NotOrthonormal { defect });
    }
    let mut best: f64 = 0.0;
    for phi_i in basis {
        let mut sum = 0.0;
        for tau in torus.points() {
            for phi_q in basis {
                sum += covariance_entry(h, chi, phi_i, phi_q, tau, torus, None)?.norm();
            }
        }
        best = best.max(sum * torus.step());
    }
    Ok(best)
}
