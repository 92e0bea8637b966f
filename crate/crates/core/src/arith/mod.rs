pub mod factored;
pub mod polymod;
pub mod primes;
pub mod quad;
pub mod symbols;

pub use factored::{padic_valuation, spf_factor, FactoredInteger};
pub use polymod::{splitting_pattern, SplittingPattern};
pub use primes::{factor_u64, is_prime_u64, sieve_primes, SpfTable};
pub use quad::{quadratic_prime_split, residue_symbol_deg1, sqrt_mod_p, QuadraticPrimeSplit, SplitKind};
pub use symbols::{hilbert_symbol, jacobi_symbol, kronecker_symbol, Place};
