//! Frobenian multiplicative functions: prime-power extension rules,
//! segmented partial sums (plain, gridded, and in progressions), Euler
//! products, and Selberg–Delange constant fitting.

pub mod fit;
pub mod spec;
pub mod sums;

pub use fit::{
    euler_product_limit, gamma, geometric_grid, mertens_product, selberg_delange_fit,
    EulerProductLimit, SelbergDelangeFit,
};
pub use spec::{indicator_from_prime_set, FrobMultSpec, PrimePowerRule};
pub use sums::{
    partial_sum, partial_sum_grid, partial_sum_progression, partial_sum_with_segment,
    ProgressionSum, DEFAULT_SEGMENT,
};
