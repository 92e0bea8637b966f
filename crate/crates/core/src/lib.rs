//! Frobenian multiplicative functions, local divisor densities, sieved
//! correlation sums over systems of linear forms, and counts of everywhere
//! locally soluble fibres in explicit families (conic bundles, multinorm
//! equations, quaternion Brauer zero-loci).
//!
//! The layering is strictly bottom-up:
//!
//! * [`arith`] — exact integer, symbol, and polynomial-mod-p arithmetic;
//! * [`frobenian`] — functions on primes given by character combinations or
//!   splitting patterns, their means and twists;
//! * [`multiplicative`] — prime-power extension rules, partial sums,
//!   Selberg–Delange constant fitting;
//! * [`local_densities`] — exact divisor densities α, local factors β, and
//!   their inclusion–exclusion identity;
//! * [`correlations`] — sieved sums Σ ∏ ρ_j(L_j(x)) over lattice boxes, with
//!   p-adic closeness constraints, and asymptotic-order fitting;
//! * [`families`] — solubility oracles, detectors, Δ-exponents and counts
//!   for the explicit families;
//! * [`report`] — CSV/JSON emission;
//! * [`oracle`] — brute-force reference implementations for tests.

pub mod arith;
pub mod correlations;
pub mod error;
pub mod families;
pub mod frobenian;
pub mod local_densities;
pub mod multiplicative;
pub mod oracle;
pub mod report;
pub mod value;

pub use error::{Error, Result};
pub use value::Scalar;
