//! Dense Jordan–Wigner realisation of the CAR algebra over `ℂ^D`, quasi-free
//! density matrices, monomial expectations and the generalised Wick determinant.
//!
//! Basis states of the Fock space are bit strings `s ∈ {0..2^D}`; bit `i` is the
//! occupation of mode `i`. Modes over `𝔥 ⊗ 𝕄` are ordered lexicographically in
//! `(𝔥 index, 𝕄 index)`, matching [`crate::linalg::kron_vec`].

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::linalg::{log_add_exp, max_abs, CMat, CVec, C64, ONE, ZERO};
use crate::perm::Permutation;
use crate::spectral::{eig_hermitian, HermitianMatrix};

pub const DEFAULT_FOCK_CAP: usize = 10;
pub const HARD_FOCK_CAP: usize = 14;

/// Mode cap from `FERMICOV_FOCK_CAP` (default 10, never above 14).
pub fn fock_cap() -> usize {
    std::env::var("FERMICOV_FOCK_CAP")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(DEFAULT_FOCK_CAP)
        .min(HARD_FOCK_CAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    modes: usize,
}

impl FockSpace {
    pub fn new(modes: usize) -> Result<Self> {
        let cap = fock_cap();
        if modes == 0 || modes > cap {
            return Err(Error::FockCap { modes, cap });
        }
        Ok(Self { modes })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        1 << self.modes
    }
}

/// `(-1)^{Σ_{j<i} n_j}` for basis state `s`.
fn jw_sign(s: usize, i: usize) -> f64 {
    if (s & ((1 << i) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    fock: FockSpace,
    matrix: CMat,
}

impl FockOperator {
    pub fn new(fock: FockSpace, matrix: CMat) -> Result<Self> {
        if matrix.shape() != (fock.dim(), fock.dim()) {
            return Err(Error::DimMismatch {
                expected: fock.dim(),
                got: matrix.nrows(),
            });
        }
        Ok(Self { fock, matrix })
    }

    pub fn identity(fock: FockSpace) -> Self {
        Self {
            fock,
            matrix: CMat::identity(fock.dim(), fock.dim()),
        }
    }

    pub fn zero(fock: FockSpace) -> Self {
        Self {
            fock,
            matrix: CMat::zeros(fock.dim(), fock.dim()),
        }
    }

    pub fn fock(&self) -> FockSpace {
        self.fock
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            fock: self.fock,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            fock: self.fock,
            matrix: &self.matrix * c,
        }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    /// `{A, B} = AB + BA`.
    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: &FockOperator) -> FockOperator {
        FockOperator {
            fock: self.fock,
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

impl Add for &FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: &FockOperator) -> FockOperator {
        FockOperator {
            fock: self.fock,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: &FockOperator) -> FockOperator {
        FockOperator {
            fock: self.fock,
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

/// `a(Ψ) = Σ_i conj(Ψ_i) c_i`, antilinear in `Ψ`.
pub fn annihilate(fock: FockSpace, psi: &CVec) -> Result<FockOperator> {
    if psi.len() != fock.modes() {
        return Err(Error::DimMismatch {
            expected: fock.modes(),
            got: psi.len(),
        });
    }
    let dim = fock.dim();
    let mut m = CMat::zeros(dim, dim);
    for s in 0..dim {
        for i in 0..fock.modes() {
            if s & (1 << i) != 0 && psi[i] != ZERO {
                m[(s ^ (1 << i), s)] += psi[i].conj() * jw_sign(s, i);
            }
        }
    }
    Ok(FockOperator { fock, matrix: m })
}

/// `a⁺(Ψ) = a(Ψ)*`.
pub fn create(fock: FockSpace, psi: &CVec) -> Result<FockOperator> {
    Ok(annihilate(fock, psi)?.adjoint())
}

/// The mode annihilators `c_0..c_{D-1}`.
pub fn jordan_wigner(modes: usize) -> Result<Vec<FockOperator>> {
    if modes > HARD_FOCK_CAP {
        return Err(Error::FockCap {
            modes,
            cap: HARD_FOCK_CAP,
        });
    }
    let fock = FockSpace::new(modes)?;
    (0..modes)
        .map(|i| {
            let e = CVec::from_fn(modes, |j, _| if j == i { ONE } else { ZERO });
            annihilate(fock, &e)
        })
        .collect()
}

/// `dΓ(h) = Σ_{ij} h_ij c_i⁺ c_j`.
pub fn second_quantize(fock: FockSpace, h: &HermitianMatrix) -> Result<FockOperator> {
    let d = fock.modes();
    if h.dim() != d {
        return Err(Error::DimMismatch {
            expected: d,
            got: h.dim(),
        });
    }
    let hm = h.matrix();
    let dim = fock.dim();
    let mut m = CMat::zeros(dim, dim);
    for s in 0..dim {
        for j in 0..d {
            if s & (1 << j) == 0 {
                continue;
            }
            let s1 = s ^ (1 << j);
            let sj = jw_sign(s, j);
            for i in 0..d {
                if s1 & (1 << i) != 0 || hm[(i, j)] == ZERO {
                    continue;
                }
                m[(s1 | (1 << i), s)] += hm[(i, j)] * (sj * jw_sign(s1, i));
            }
        }
    }
    Ok(FockOperator { fock, matrix: m })
}

/// Gauge-invariant quasi-free state `e^{-β dΓ(h)} / Z` with symbol `(1 + e^{βh})⁻¹`.
#[derive(Debug, Clone)]
pub struct QuasiFreeState {
    fock: FockSpace,
    beta: f64,
    symbol: CMat,
    density: CMat,
    log_p: Vec<f64>,
    basis: CMat,
}

pub fn quasifree_density(h: &HermitianMatrix, beta: f64) -> Result<QuasiFreeState> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta} must be positive")));
    }
    let fock = FockSpace::new(h.dim())?;
    let one = eig_hermitian(h)?;
    let symbol = one.matrix_function(|l| crate::linalg::fermi(beta * l));
    let dgamma = second_quantize(fock, h)?;
    let many = eig_hermitian(&HermitianMatrix::new(dgamma.into_matrix())?)?;
    let neg: Vec<f64> = many.eigenvalues().iter().map(|e| -beta * e).collect();
    if neg.iter().any(|x| !x.is_finite()) {
        return Err(Error::TraceUnderflow);
    }
    let top = neg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = neg.iter().map(|x| x - top).collect();
    let log_z = shifted.iter().fold(f64::NEG_INFINITY, |a, &x| log_add_exp(a, x));
    let log_p: Vec<f64> = shifted.iter().map(|x| x - log_z).collect();
    let basis = many.eigenvectors().clone();
    let mut scaled = basis.clone();
    for (k, lp) in log_p.iter().enumerate() {
        let p = lp.exp();
        scaled.column_mut(k).iter_mut().for_each(|z| *z *= p);
    }
    let density = scaled * basis.adjoint();
    Ok(QuasiFreeState {
        fock,
        beta,
        symbol,
        density,
        log_p,
        basis,
    })
}

impl QuasiFreeState {
    pub fn fock(&self) -> FockSpace {
        self.fock
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn symbol(&self) -> &CMat {
        &self.symbol
    }

    pub fn density(&self) -> &CMat {
        &self.density
    }

    /// `ln p_k` for the eigenvalues of the density matrix.
    pub fn log_weights(&self) -> &[f64] {
        &self.log_p
    }

    /// Eigenbasis of the density matrix (columns).
    pub fn eigenbasis(&self) -> &CMat {
        &self.basis
    }

    /// `Tr(Dρ X)`.
    pub fn expect(&self, x: &FockOperator) -> C64 {
        let mut acc = ZERO;
        let d = &self.density;
        let m = x.matrix();
        for i in 0..d.nrows() {
            for j in 0..d.ncols() {
                acc += d[(i, j)] * m[(j, i)];
            }
        }
        acc
    }
}

/// `O_π(a⁺(Ψ_1), …, a⁺(Ψ_{N₁}), a(Ψ_{N₁+N₂}), …, a(Ψ_{N₁+1}))`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialSpec {
    pub n1: usize,
    pub n2: usize,
    pub psis: Vec<CVec>,
    pub pi: Permutation,
}

impl MonomialSpec {
    pub fn new(n1: usize, n2: usize, psis: Vec<CVec>, pi: Permutation) -> Result<Self> {
        if psis.len() != n1 + n2 || pi.len() != n1 + n2 {
            return Err(Error::DimMismatch {
                expected: n1 + n2,
                got: psis.len().min(pi.len()),
            });
        }
        Ok(Self { n1, n2, psis, pi })
    }

    /// The argument list `A_1..A_{N₁+N₂}` as Fock operators.
    pub fn arguments(&self, fock: FockSpace) -> Result<Vec<FockOperator>> {
        let mut args = Vec::with_capacity(self.n1 + self.n2);
        for psi in &self.psis[..self.n1] {
            args.push(create(fock, psi)?);
        }
        for psi in self.psis[self.n1..].iter().rev() {
            args.push(annihilate(fock, psi)?);
        }
        Ok(args)
    }

    /// `(-1)^π A_{π⁻¹(1)} ⋯ A_{π⁻¹(N₁+N₂)}`.
    pub fn operator(&self, fock: FockSpace) -> Result<FockOperator> {
        let args = self.arguments(fock)?;
        let inv = self.pi.inverse();
        let mut out = FockOperator::identity(fock).scale(C64::new(self.pi.sign(), 0.0));
        for q in 0..args.len() {
            out = &out * &args[inv.apply(q)];
        }
        Ok(out)
    }
}

pub fn expect_monomial(state: &QuasiFreeState, spec: &MonomialSpec) -> Result<C64> {
    Ok(state.expect(&spec.operator(state.fock())?))
}

/// Position (0-based) of `a(Ψ_{N+l})` in the argument list of `O_π` for an `N + N` monomial.
pub fn annihilator_slot(order: usize, l: usize) -> usize {
    2 * order - 1 - l
}

/// `det[ρ(O_{π_{k,N+l}}(a⁺(Ψ_k), a(Ψ_{N+l})))]_{k,l}`; `two_point(k, l, ordered)` returns
/// the two-point value in the ordered (`a⁺a`) or swapped (`-a a⁺`) arrangement.
pub fn wick_determinant<F>(two_point: F, order: usize, pi: &Permutation) -> Result<C64>
where
    F: Fn(usize, usize, bool) -> C64,
{
    if pi.len() != 2 * order {
        return Err(Error::DimMismatch {
            expected: 2 * order,
            got: pi.len(),
        });
    }
    let m = CMat::from_fn(order, order, |k, l| {
        two_point(k, l, pi.apply(k) < pi.apply(annihilator_slot(order, l)))
    });
    Ok(m.determinant())
}

/// [`wick_determinant`] with two-point values read off a symbol `S`.
pub fn wick_from_symbol(symbol: &CMat, psis: &[CVec], pi: &Permutation) -> Result<C64> {
    if psis.len() % 2 != 0 {
        return Err(Error::InvalidParameter("need 2N vectors".into()));
    }
    let order = psis.len() / 2;
    let id = CMat::identity(symbol.nrows(), symbol.ncols());
    wick_determinant(
        |k, l, ordered| {
            let (a, b) = (&psis[order + l], &psis[k]);
            if ordered {
                a.dotc(&(symbol * b))
            } else {
                -a.dotc(&((&id - symbol) * b))
            }
        },
        order,
        pi,
    )
}
