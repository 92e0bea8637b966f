//! Frobenian functions on primes: finite character combinations and
//! splitting-pattern class functions, their means, twists, exceptional
//! characters, and prime-sum sanity checks.

pub mod character;
pub mod spec;
pub mod sums;

pub use character::{all_characters, primitive_characters_up_to, DirichletCharacter};
pub use spec::{poly_discriminant, Exactness, FrobKind, FrobenianSpec, MeanValue};
pub use sums::{li, prime_sum_check, PrimeSumReport, PrimeSumVariant};
