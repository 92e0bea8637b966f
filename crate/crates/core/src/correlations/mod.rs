//! Sieved correlation sums of multiplicative functions over linear forms in
//! lattice boxes, with primitivity and v-adic closeness constraints, and
//! order-of-growth fitting of the resulting counts.

pub mod box_region;
pub mod constrained;
pub mod fit;
pub mod sum;

pub use box_region::{HalfSpace, LatticeBox};
pub use constrained::{
    constrained_correlation_sum, constrained_correlation_sum_normalized,
    constrained_correlation_sum_with, ConstraintSet, PadicEncoding,
};
pub use fit::{fit_asymptotic, FitReport};
pub use sum::{
    correlation_sum, correlation_sum_coprime_to, correlation_sum_parallel,
    correlation_sum_segmented, scale, DEFAULT_POINT_BUDGET,
};
