//! Exact local divisor densities for systems of integer linear forms, the
//! congruence-density identities relating them, and the truncated Euler
//! factors and leading constants built from them.

pub mod alpha;
pub mod beta;
pub mod factor;
pub mod system;

pub use alpha::{alpha_local, alpha_local_with_budget, alpha_multi, DEFAULT_ENUMERATION_BUDGET};
pub use beta::{
    alpha_beta_identity_check, alpha_beta_identity_check_at, beta_local, beta_local_with_budget,
    IdentityCheck,
};
pub use factor::{
    large_prime_factor, leading_constant_scale_factor, truncated_leading_constant,
    LargePrimeFactor, TruncatedLeadingConstant,
};
pub use system::{LinearForm, LinearFormSystem};
