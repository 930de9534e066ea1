//! The discrete torus `T_n = {-β + kβ/n : k = 1..2n}` and antiperiodic
//! vector-valued functions on it.
//!
//! Grid points are handled as integer *ticks*: the point `α = tick·β/n` with
//! `tick ∈ (-n, n]`. All wrap-around arithmetic is done on ticks modulo `2n`,
//! so no floating-point rounding ever decides which grid point is meant. The
//! spec-style index `k ∈ {1..2n}` is `tick + n`.
//!
//! [`APFunction`] stores all `2n` values. Every constructor fills the half
//! period `(-β, 0]` and writes `f(α + β) = -f(α)` by negation, so antiperiodicity
//! holds bit-for-bit.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteTorus {
    beta: f64,
    n: usize,
}

/// A point of `T_n`, stored as `tick = β⁻¹n·α ∈ (-n, n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorusPoint {
    tick: i64,
}

impl TorusPoint {
    pub fn tick(self) -> i64 {
        self.tick
    }

    /// Spec-style label `k ∈ {1..2n}` with `α = -β + kβ/n`.
    pub fn k(self, torus: &DiscreteTorus) -> usize {
        (self.tick + torus.n as i64) as usize
    }
}

impl DiscreteTorus {
    pub fn new(beta: f64, n: usize) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) || n < 2 || n % 2 != 0 {
            return Err(Error::InvalidTorus { beta, n });
        }
        Ok(Self { beta, n })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of grid points, `2n`.
    pub fn len(&self) -> usize {
        2 * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `n⁻¹β`.
    pub fn step(&self) -> f64 {
        self.beta / self.n as f64
    }

    /// `β⁻¹n`, the singular eigenvalue of the Bernoulli–Euler map.
    pub fn inv_step(&self) -> f64 {
        self.n as f64 / self.beta
    }

    /// Reduce an arbitrary tick into `(-n, n]`.
    pub fn reduce(&self, tick: i64) -> TorusPoint {
        let n = self.n as i64;
        TorusPoint {
            tick: (tick + n - 1).rem_euclid(2 * n) - n + 1,
        }
    }

    pub fn point_from_tick(&self, tick: i64) -> TorusPoint {
        self.reduce(tick)
    }

    /// The point `-β + kβ/n`, `k ∈ {1..2n}`.
    pub fn point_from_k(&self, k: usize) -> Result<TorusPoint> {
        if k == 0 || k > self.len() {
            return Err(Error::InvalidParameter(format!(
                "grid label k = {k} outside 1..={}",
                self.len()
            )));
        }
        Ok(TorusPoint {
            tick: k as i64 - self.n as i64,
        })
    }

    /// Locate a real number on the grid (tolerance `1e-9` of a spacing), reduced mod `2β`.
    pub fn point_at(&self, alpha: f64) -> Result<TorusPoint> {
        let ticks = alpha / self.step();
        let rounded = ticks.round();
        if !alpha.is_finite() || (ticks - rounded).abs() > 1e-9 {
            return Err(Error::OffGrid {
                alpha,
                step: self.step(),
            });
        }
        Ok(self.reduce(rounded as i64))
    }

    pub fn alpha(&self, p: TorusPoint) -> f64 {
        p.tick as f64 * self.step()
    }

    /// Storage index `0..2n` of a point (`tick + n - 1`).
    pub fn index(&self, p: TorusPoint) -> usize {
        (p.tick + self.n as i64 - 1) as usize
    }

    pub fn point_of_index(&self, i: usize) -> TorusPoint {
        TorusPoint {
            tick: i as i64 - self.n as i64 + 1,
        }
    }

    pub fn add(&self, a: TorusPoint, b: TorusPoint) -> TorusPoint {
        self.reduce(a.tick + b.tick)
    }

    pub fn sub(&self, a: TorusPoint, b: TorusPoint) -> TorusPoint {
        self.reduce(a.tick - b.tick)
    }

    /// All grid points in storage order, from `-β + β/n` to `β`.
    pub fn points(&self) -> impl Iterator<Item = TorusPoint> + '_ {
        (0..self.len()).map(move |i| self.point_of_index(i))
    }

    /// The half period `(-β, 0]`, in storage order.
    pub fn half_period(&self) -> impl Iterator<Item = TorusPoint> + '_ {
        (0..self.n).map(move |i| self.point_of_index(i))
    }

    /// True when the point lies in `[0, β)`.
    pub fn in_half_open_period(&self, p: TorusPoint) -> bool {
        p.tick >= 0 && p.tick < self.n as i64
    }
}

/// An antiperiodic function `T_n → C^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct APFunction {
    torus: DiscreteTorus,
    dim: usize,
    // index: storage_index * dim + component
    values: Vec<C64>,
}

impl APFunction {
    pub fn zeros(torus: DiscreteTorus, dim: usize) -> Self {
        Self {
            torus,
            dim,
            values: vec![ZERO; torus.len() * dim],
        }
    }

    /// Build from values on `(-β, 0]`; the other half is filled by antiperiodicity.
    pub fn from_half_period<F>(torus: DiscreteTorus, dim: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(TorusPoint) -> CVec,
    {
        let mut out = Self::zeros(torus, dim);
        let n = torus.n();
        for i in 0..n {
            let v = f(torus.point_of_index(i));
            if v.len() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            for c in 0..dim {
                out.values[i * dim + c] = v[c];
                out.values[(i + n) * dim + c] = -v[c];
            }
        }
        Ok(out)
    }

    /// Scalar version of [`APFunction::from_half_period`].
    pub fn scalar_from_half_period<F>(torus: DiscreteTorus, mut f: F) -> Self
    where
        F: FnMut(TorusPoint) -> C64,
    {
        Self::from_half_period(torus, 1, |p| CVec::from_element(1, f(p)))
            .expect("scalar closure always yields dimension 1")
    }

    /// Build from all `2n` values; antiperiodicity is checked to exact equality.
    pub fn from_values(torus: DiscreteTorus, dim: usize, values: &[CVec]) -> Result<Self> {
        if values.len() != torus.len() {
            return Err(Error::DimMismatch {
                expected: torus.len(),
                got: values.len(),
            });
        }
        let n = torus.n();
        let mut out = Self::zeros(torus, dim);
        for (i, v) in values.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            out.values[i * dim..(i + 1) * dim].copy_from_slice(v.as_slice());
        }
        for i in 0..n {
            for c in 0..dim {
                if out.values[(i + n) * dim + c] != -out.values[i * dim + c] {
                    return Err(Error::NotAntiperiodic { index: i });
                }
            }
        }
        Ok(out)
    }

    pub fn torus(&self) -> &DiscreteTorus {
        &self.torus
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, p: TorusPoint) -> &[C64] {
        let i = self.torus.index(p);
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vector_at(&self, p: TorusPoint) -> CVec {
        CVec::from_column_slice(self.at(p))
    }

    /// Scalar value; panics if `dim != 1`.
    pub fn scalar_at(&self, p: TorusPoint) -> C64 {
        assert_eq!(self.dim, 1, "scalar_at on a vector-valued function");
        self.at(p)[0]
    }

    /// Exact structural check `f(α + β) = -f(α)`.
    pub fn is_antiperiodic(&self) -> bool {
        let n = self.torus.n();
        let d = self.dim;
        (0..n * d).all(|j| self.values[n * d + j] == -self.values[j])
    }

    /// `⟨f, g⟩ = n⁻¹β Σ_α ⟨f(α), g(α)⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_compatible(other)?;
        let s: C64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.torus.step())
    }

    pub fn norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|z| z.norm_sqr()).sum();
        (s * self.torus.step()).sqrt()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            torus: self.torus,
            dim: self.dim,
            values: self.values.iter().map(|z| z * c).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            torus: self.torus,
            dim: self.dim,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Fiberwise application `(Âf)(α) = A f(α)`.
    pub fn apply_fiberwise(&self, a: &CMat) -> Result<Self> {
        if a.ncols() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: a.ncols(),
            });
        }
        Self::from_half_period(self.torus, a.nrows(), |p| a * self.vector_at(p))
    }

    /// Coordinates on the half period `(-β, 0]`, the natural basis of `ℓ²_ap`.
    pub fn to_reduced(&self) -> CVec {
        CVec::from_column_slice(&self.values[..self.torus.n() * self.dim])
    }

    pub fn from_reduced(torus: DiscreteTorus, dim: usize, coords: &CVec) -> Result<Self> {
        if coords.len() != torus.n() * dim {
            return Err(Error::DimMismatch {
                expected: torus.n() * dim,
                got: coords.len(),
            });
        }
        Self::from_half_period(torus, dim, |p| {
            let i = torus.index(p);
            CVec::from_column_slice(&coords.as_slice()[i * dim..(i + 1) * dim])
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |a, z| a.max(z.norm()))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.torus != other.torus {
            return Err(Error::TorusMismatch);
        }
        if self.dim != other.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(())
    }
}

/// The antiperiodic discrete delta: `β⁻¹n/2` at `α = 0`, `-β⁻¹n/2` at `α = β`.
pub fn delta_ap(torus: &DiscreteTorus) -> APFunction {
    let peak = C64::new(torus.inv_step() / 2.0, 0.0);
    APFunction::scalar_from_half_period(*torus, |p| if p.tick() == 0 { peak } else { ZERO })
}

/// `(g ∗ f)(α) = n⁻¹β Σ_τ g(α - τ) f(τ)` for vector-valued `g` and scalar `f`.
pub fn convolve(g: &APFunction, f: &APFunction) -> Result<APFunction> {
    if g.torus() != f.torus() {
        return Err(Error::TorusMismatch);
    }
    if f.dim() != 1 {
        return Err(Error::DimMismatch {
            expected: 1,
            got: f.dim(),
        });
    }
    let torus = *g.torus();
    let d = g.dim();
    let step = C64::new(torus.step(), 0.0);
    APFunction::from_half_period(torus, d, |alpha| {
        let mut acc = CVec::zeros(d);
        for tau in torus.points() {
            let w = f.scalar_at(tau);
            if w == ZERO {
                continue;
            }
            let gv = g.at(torus.sub(alpha, tau));
            for c in 0..d {
                acc[c] += gv[c] * w;
            }
        }
        acc * step
    })
}

/// Forward difference `(∂f)(α) = β⁻¹n (f(α + n⁻¹β) - f(α))`.
pub fn discrete_derivative(f: &APFunction) -> APFunction {
    let torus = *f.torus();
    let c = C64::new(torus.inv_step(), 0.0);
    APFunction::from_half_period(torus, f.dim(), |alpha| {
        let next = f.vector_at(torus.reduce(alpha.tick() + 1));
        (next - f.vector_at(alpha)) * c
    })
    .expect("derivative preserves dimension")
}

/// `φ̂(α) = δ_ap(α) φ`.
pub fn embed_vector(phi: &CVec, torus: &DiscreteTorus) -> APFunction {
    let peak = torus.inv_step() / 2.0;
    APFunction::from_half_period(*torus, phi.len(), |p| {
        if p.tick() == 0 {
            phi * C64::new(peak, 0.0)
        } else {
            CVec::zeros(phi.len())
        }
    })
    .expect("embedding preserves dimension")
}

/// Matrix of the scalar difference operator `𝔡` in half-period coordinates
/// (`n × n`, the wrap `f(β⁻¹n·0 + 1) = -f(1 - n)` carries the antiperiodic sign).
pub fn derivative_matrix(torus: &DiscreteTorus) -> DMatrix<f64> {
    let n = torus.n();
    let c = torus.inv_step();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] -= c;
        if i + 1 < n {
            m[(i, i + 1)] += c;
        } else {
            m[(i, 0)] -= c;
        }
    }
    m
}

/// Closed-form spectrum of `𝔡`: `β⁻¹n(ω_k - 1)` with `ω_k = e^{iπ(2k+1)/n}`.
pub fn derivative_spectrum(torus: &DiscreteTorus) -> Vec<C64> {
    let n = torus.n() as f64;
    (0..torus.n())
        .map(|k| {
            let theta = std::f64::consts::PI * (2 * k + 1) as f64 / n;
            (C64::from_polar(1.0, theta) - 1.0) * torus.inv_step()
        })
        .collect()
}
