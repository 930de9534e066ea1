//! Numerical instantiation of discrete-time fermionic covariances and their
//! determinant bounds.
//!
//! The crate is organised bottom-up:
//!
//! * [`torus`]: the discrete torus `T_n`, antiperiodic functions on it, the
//!   discrete delta, convolution and the forward difference operator.
//! * [`spectral`]: Hermitian eigendecomposition and the scalar function
//!   calculus built on it (Bernoulli–Euler exponent, cutoffs, sign powers).
//! * [`covariance`]: the explicit resolvent kernels `g_λ`, covariance entries,
//!   the determinant under study and its Gram/decay companions.
//! * [`mspace`]: the quotient Hilbert space attached to a PSD colour matrix and
//!   Brydges–Kennedy interpolation matrices.
//! * [`car_fock`]: a dense Jordan–Wigner realisation of the CAR algebra,
//!   quasi-free density matrices and the generalised Wick determinant.
//! * [`modular`]: the standard (Hilbert–Schmidt) representation, modular
//!   powers, Schatten norms and the modular representation of determinants.
//! * [`verify`]: ordering permutations and the seeded verification suites.
//! * [`report`]: CSV/JSON rendering of suite results.

pub mod car_fock;
pub mod covariance;
pub mod error;
pub mod linalg;
pub mod modular;
pub mod mspace;
pub mod perm;
pub mod report;
pub mod spectral;
pub mod torus;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};
