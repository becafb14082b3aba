//! Exact number-field/ideal/lattice arithmetic and the analytic layers built on it:
//! bump-train densities `F_k`, iterated measures `μ_k`, and checkers for the
//! supporting estimates (exponential sums, CRT, separation, Fourier decay, ball
//! regularity, restriction-failure quotients, convolution stability, Hausdorff
//! covering sums).
//!
//! Layering, lowest first:
//!
//! * [`linalg`], [`primes`], [`polyfp`], [`quadrature`] — exact matrices/HNF,
//!   sieves, factorization over F_p, Gauss–Legendre rules.
//! * [`nfcore`] — number fields presented by a monogenic power basis.
//! * [`idealalg`] — fractional ideals in HNF, prime enumeration, CRT.
//! * [`latgeo`] — lattice-point geometry of the modules `I⁻¹`.
//! * [`bump`] — the smooth profiles φ, φ₀, ψ and their cached transforms.
//! * [`construct`] — parameters (τ, ρ, M_k, η_k, P_k, c_k, J_k), trains Φ_{I,η},
//!   densities F_k, and measures μ_k in space and frequency.
//! * [`analyze`] — lemma checkers, exponent fits, and report types.

pub mod analyze;
pub mod bump;
pub mod construct;
pub mod idealalg;
pub mod latgeo;
pub mod linalg;
pub mod nfcore;
pub mod polyfp;
pub mod primes;
pub mod quadrature;

use thiserror::Error;

/// Errors shared across the crate. Callers that map to process exit codes
/// distinguish caps (budget) from invalid parameters.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
