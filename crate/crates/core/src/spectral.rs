//! Hermitian eigendecomposition and the scalar functional calculus on top of it.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_abs, CMat, CVec, C64};
use crate::torus::DiscreteTorus;

/// Relative Hermiticity tolerance, scaled by `max(1, max|A_ij|)`.
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    entries: CMat,
}

impl HermitianMatrix {
    /// Checks `‖A - A*‖_max` and stores the symmetrized `(A + A*)/2`.
    pub fn new(a: CMat) -> Result<Self> {
        if !a.is_square() || a.nrows() == 0 {
            return Err(Error::DimMismatch {
                expected: a.nrows().max(1),
                got: a.ncols(),
            });
        }
        let defect = max_abs(&(&a - a.adjoint()));
        if defect > HERMITIAN_TOL * max_abs(&a).max(1.0) {
            return Err(Error::NotHermitian { defect });
        }
        let entries = (&a + a.adjoint()) * C64::new(0.5, 0.0);
        Ok(Self { entries })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let d = CVec::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self::new(CMat::from_diagonal(&d))
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: CMat::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.entries
    }
}

/// `H = Σ_j λ_j v_j v_j*` with `λ` ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    eigenvalues: Vec<f64>,
    eigenvectors: CMat,
}

pub fn eig_hermitian(h: &HermitianMatrix) -> Result<SpectralData> {
    let d = h.dim();
    let eig = SymmetricEigen::try_new(h.matrix().clone(), f64::EPSILON, 100_000)
        .ok_or(Error::EigenNonConvergence)?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vecs = CMat::zeros(d, d);
    let mut vals = Vec::with_capacity(d);
    for (col, &j) in order.iter().enumerate() {
        vals.push(eig.eigenvalues[j]);
        let v = eig.eigenvectors.column(j);
        // phase fix: largest-magnitude component real positive (first one on ties)
        let mut best = 0;
        for i in 1..d {
            if v[i].norm() > v[best].norm() * (1.0 + 1e-12) {
                best = i;
            }
        }
        let phase = v[best].conj() / v[best].norm();
        vecs.set_column(col, &(v * phase));
    }
    Ok(SpectralData {
        eigenvalues: vals,
        eigenvectors: vecs,
    })
}

impl SpectralData {
    /// Build from an explicit eigen-list; the columns of `eigenvectors` must be orthonormal.
    pub fn from_parts(eigenvalues: Vec<f64>, eigenvectors: CMat) -> Result<Self> {
        let d = eigenvalues.len();
        if eigenvectors.shape() != (d, d) {
            return Err(Error::DimMismatch {
                expected: d,
                got: eigenvectors.ncols(),
            });
        }
        let defect = max_abs(&(eigenvectors.adjoint() * &eigenvectors - CMat::identity(d, d)));
        if defect > 1e-10 {
            return Err(Error::NotOrthonormal { defect });
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMat {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, j: usize) -> CVec {
        self.eigenvectors.column(j).into_owned()
    }

    pub fn reconstruct(&self) -> CMat {
        self.matrix_function(|x| x)
    }

    /// `Σ_j f(λ_j) v_j ⟨v_j, x⟩`.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F, x: &CVec) -> Result<CVec> {
        self.apply_complex(|l| C64::new(f(l), 0.0), x)
    }

    pub fn apply_complex<F: Fn(f64) -> C64>(&self, f: F, x: &CVec) -> Result<CVec> {
        if x.len() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let mut coeffs = self.eigenvectors.adjoint() * x;
        for (c, &l) in coeffs.iter_mut().zip(&self.eigenvalues) {
            *c *= f(l);
        }
        Ok(&self.eigenvectors * coeffs)
    }

    /// Dense `U f(Λ) U*`.
    pub fn matrix_function<F: Fn(f64) -> f64>(&self, f: F) -> CMat {
        self.matrix_function_complex(|l| C64::new(f(l), 0.0))
    }

    pub fn matrix_function_complex<F: Fn(f64) -> C64>(&self, f: F) -> CMat {
        let mut scaled = self.eigenvectors.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let fl = f(l);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= fl);
        }
        scaled * self.eigenvectors.adjoint()
    }

    /// Spectral data of `f(H)` (same eigenvectors, possibly unsorted eigenvalues).
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            eigenvalues: self.eigenvalues.iter().map(|&l| f(l)).collect(),
            eigenvectors: self.eigenvectors.clone(),
        }
    }
}

/// Scalar cutoff `χ : ℝ → [0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CutoffSpec {
    One,
    Indicator { a: f64, b: f64 },
    Gaussian { center: f64, width: f64 },
    /// Nearest-point lookup in a table of `(λ, χ(λ))` pairs.
    Table { points: Vec<(f64, f64)> },
    Zero,
}

impl CutoffSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            CutoffSpec::One | CutoffSpec::Zero => Ok(()),
            CutoffSpec::Indicator { a, b } => {
                if a.is_finite() && b.is_finite() && a <= b {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("indicator interval [{a}, {b}]")))
                }
            }
            CutoffSpec::Gaussian { center, width } => {
                if center.is_finite() && width.is_finite() && *width > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "gaussian window center {center}, width {width}"
                    )))
                }
            }
            CutoffSpec::Table { points } => {
                if points.is_empty() {
                    return Err(Error::InvalidParameter("empty cutoff table".into()));
                }
                if points
                    .iter()
                    .any(|&(l, v)| !l.is_finite() || !v.is_finite() || v < 0.0)
                {
                    return Err(Error::InvalidParameter(
                        "cutoff table needs finite points and nonnegative values".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        match self {
            CutoffSpec::One => 1.0,
            CutoffSpec::Zero => 0.0,
            CutoffSpec::Indicator { a, b } => {
                if (*a..=*b).contains(&lambda) {
                    1.0
                } else {
                    0.0
                }
            }
            CutoffSpec::Gaussian { center, width } => {
                let x = (lambda - center) / width;
                (-0.5 * x * x).exp()
            }
            CutoffSpec::Table { points } => points
                .iter()
                .min_by(|p, q| (p.0 - lambda).abs().total_cmp(&(q.0 - lambda).abs()))
                .map_or(0.0, |p| p.1),
        }
    }
}

/// True when `λ` lies in the band `|λ - β⁻¹n| ≤ 1e-12·β⁻¹n`.
pub fn is_singular(lambda: f64, torus: &DiscreteTorus) -> bool {
    (lambda - torus.inv_step()).abs() <= 1e-12 * torus.inv_step()
}

/// `Ϝ_η(λ) = -β⁻¹n ln|1 - n⁻¹βλ|`, or `η` at `λ = β⁻¹n`.
pub fn bernoulli_euler_f(lambda: f64, torus: &DiscreteTorus, eta: f64) -> f64 {
    if is_singular(lambda, torus) {
        eta
    } else {
        -torus.inv_step() * (1.0 - torus.step() * lambda).abs().ln()
    }
}

/// `sgn(1 - n⁻¹βλ)` with `sgn(0) = +1`.
pub fn sign_e(lambda: f64, torus: &DiscreteTorus) -> f64 {
    if is_singular(lambda, torus) || 1.0 - torus.step() * lambda >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// `E^k x` with `E = sgn(1 - n⁻¹βH)`.
pub fn sign_power(s: &SpectralData, torus: &DiscreteTorus, k: i64, x: &CVec) -> Result<CVec> {
    if k.rem_euclid(2) == 0 {
        if x.len() != s.dim() {
            return Err(Error::DimMismatch {
                expected: s.dim(),
                got: x.len(),
            });
        }
        return Ok(x.clone());
    }
    s.apply(|l| sign_e(l, torus), x)
}

/// `H_η = Ϝ_η(H)` as spectral data.
pub fn h_eta(s: &SpectralData, torus: &DiscreteTorus, eta: f64) -> SpectralData {
    s.map(|l| bernoulli_euler_f(l, torus, eta))
}
