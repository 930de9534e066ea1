use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid torus: beta = {beta}, n = {n} (need beta > 0 and n even, n >= 2)")]
    InvalidTorus { beta: f64, n: usize },

    #[error("functions live on different tori")]
    TorusMismatch,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("point {alpha} is not on the grid of the torus (spacing {step})")]
    OffGrid { alpha: f64, step: f64 },

    #[error("point {alpha} lies outside [0, beta)")]
    OutsideHalfOpenPeriod { alpha: f64 },

    #[error("values are not antiperiodic at grid index {index}")]
    NotAntiperiodic { index: usize },

    #[error("matrix is not Hermitian: max |A - A*| = {defect:e}")]
    NotHermitian { defect: f64 },

    #[error("matrix is not symmetric: max |M - M^T| = {defect:e}")]
    NotSymmetric { defect: f64 },

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("colour matrix vanishes identically")]
    ZeroMatrix,

    #[error("basis is not orthonormal: max |<v_i, v_j> - delta_ij| = {defect:e}")]
    NotOrthonormal { defect: f64 },

    #[error("eigen-solver did not converge")]
    EigenNonConvergence,

    #[error("Fock space with {modes} modes exceeds the cap of {cap} modes")]
    FockCap { modes: usize, cap: usize },

    #[error("all Boltzmann weights underflow; reduce beta * |H_eta| (e.g. lower eta)")]
    TraceUnderflow,

    #[error("modular power would overflow (log-magnitude {log_magnitude:.1}); exponent outside the safe tube")]
    OverflowGuard { log_magnitude: f64 },

    #[error("chain is outside the tube: {reason}")]
    TubeViolation { reason: String },

    #[error("Schatten exponent must be >= 1 or infinity, got {0}")]
    InvalidSchattenExponent(f64),

    #[error("parameter out of range: {0}")]
    InvalidParameter(String),

    #[error("search failed: {0}")]
    SearchFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
