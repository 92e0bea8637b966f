//! Explicit families fibred over ℙ¹ (and hyperplane complements in ℙⁿ):
//! solubility oracles per fibre, detector functions, logarithmic exponents
//! Δ, and counts of everywhere locally soluble fibres.
//!
//! Affine families in a parameter t are homogenized with t = x₁/x₀, so an
//! affine linear form c·t + d becomes 𝐋(x₀, x₁) = c·x₁ + d·x₀ and the point
//! at infinity is x₀ = 0; the pencil module documents its own (opposite)
//! convention, which its prime-splitting formulas require.

pub mod brauer;
pub mod conic;
pub mod multinorm;
pub mod pencil;

pub use brauer::{brauer_delta, brauer_zero_locus_count, QuaternionBrauerFamily};
pub use conic::{
    conic_detector_spec, conic_fibre_els, conic_fibre_soluble, count_conic_bundle,
    count_conic_bundle_threaded, detector_lower_count, detector_product, ConicBundleFamily,
    ConicCount, ConicLocalTester,
};
pub use multinorm::{
    count_multinorm, multinorm_local_test, LocalNorm, MultinormCount, MultinormFamily,
    MultinormStatus,
};
pub use pencil::{
    pencil_counterexample_search, pencil_detector_sum, pencil_summand, PencilWitness,
    QuadraticPencil,
};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

/// One codimension-1 contribution to the logarithmic exponent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivisorDelta {
    /// Human-readable divisor label ("theta_1", "infinity", a hyperplane).
    pub label: String,
    /// δ_D: the density of primes where the fibre over D is split.
    pub delta: Ratio<i64>,
    /// 1 − δ_D.
    pub contribution: Ratio<i64>,
}

/// The exponent Δ = Σ_D (1 − δ_D) governing counts ≍ B^{dim}/(log B)^Δ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaExponent {
    pub per_divisor: Vec<DivisorDelta>,
    pub total: Ratio<i64>,
    /// False when some δ_D was estimated empirically rather than computed
    /// as an exact density.
    pub exact: bool,
}

impl DeltaExponent {
    pub(crate) fn from_divisors(per_divisor: Vec<DivisorDelta>, exact: bool) -> DeltaExponent {
        let total = per_divisor
            .iter()
            .map(|d| d.contribution)
            .fold(Ratio::new(0, 1), |a, b| a + b);
        DeltaExponent {
            per_divisor,
            total,
            exact,
        }
    }
}

/// Visits one representative (x₀, x₁) of every point of ℙ¹(ℚ) of height
/// ≤ B: x₀ ≥ 1 with gcd(x₀, x₁) = 1, plus the point (0, 1) at infinity.
pub(crate) fn for_each_projective_pair(b: i64, mut visit: impl FnMut(i64, i64)) {
    debug_assert!(b >= 1);
    visit(0, 1);
    for x0 in 1..=b {
        for x1 in -b..=b {
            if gcd_i64(x0, x1) == 1 {
                visit(x0, x1);
            }
        }
    }
}

pub(crate) fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// n with all square factors removed, keeping the sign.
pub(crate) fn squarefree_part(n: i64) -> i64 {
    debug_assert!(n != 0);
    let mut fac = Vec::new();
    crate::arith::factor_u64(n.unsigned_abs(), &mut fac);
    let mut out: i64 = n.signum();
    for (p, e) in fac {
        if e % 2 == 1 {
            out *= p as i64;
        }
    }
    out
}

/// The odd-exponent prime support of n together with its sign: the square
/// class of n over {−1} ∪ primes.
pub(crate) fn square_class(n: i64) -> (bool, Vec<u64>) {
    debug_assert!(n != 0);
    let mut primes = Vec::new();
    let mut fac = Vec::new();
    crate::arith::factor_u64(n.unsigned_abs(), &mut fac);
    for (p, e) in fac {
        if e % 2 == 1 {
            primes.push(p);
        }
    }
    (n < 0, primes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projective_pairs_are_primitive_and_complete() {
        let mut seen = Vec::new();
        for_each_projective_pair(3, |a, b| seen.push((a, b)));
        assert!(seen.contains(&(0, 1)));
        assert!(seen.contains(&(1, 0)));
        assert!(seen.contains(&(3, -2)));
        assert!(!seen.contains(&(2, 2)));
        // height ≤ 3: Farey-like count, each point exactly once
        let mut sorted = seen.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), seen.len());
    }

    #[test]
    fn square_class_strips_even_exponents() {
        let (neg, ps) = square_class(-180); // −2²·3²·5
        assert!(neg);
        assert_eq!(ps, vec![5]);
        let (neg, ps) = square_class(49);
        assert!(!neg);
        assert!(ps.is_empty());
    }
}
