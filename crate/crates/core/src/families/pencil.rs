//! Unlike the sibling modules, this module homogenizes with t = x₀/x₁, so
//! the ideal detectors act on x₀ − α·x₁ and the point at infinity is
//! x₁ = 0.

use super::{gcd_i64, squarefree_part};
use crate::arith::{
    factor_u64, hilbert_symbol, residue_symbol_deg1, sieve_primes, Place, QuadraticPrimeSplit,
    SplitKind,
};
use crate::error::{Error, Result};

/// One prime p over which the pencil x² − t·y² = (t² − 2)·z² has fibres of
/// opposite ℚ_p-solubility at the conjugate parameters ±t₀/t₁ with
/// t₀² − 2t₁² = p: a witness that no function of the fibre alone can detect
/// local solubility.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PencilWitness {
    pub p: u64,
    pub t0: i64,
    pub t1: i64,
    /// Is the fibre over t = +t₀/t₁ soluble over ℚ_p?
    pub soluble_plus: bool,
    /// Is the fibre over t = −t₀/t₁ soluble over ℚ_p?
    pub soluble_minus: bool,
}

/// Searches p ≤ P with p ≡ 7 mod 8 and p = t₀² − 2t₁², and reports the
/// pairs (t₀ : t₁), (t₀ : −t₁) whose fibres of x² − t·y² = (t² − 2)·z²
/// have opposite ℚ_p-solubility; every admissible p yields a witness
/// because t² − 2 ≡ p modulo squares there and Legendre(−1, p) = −1.
pub fn pencil_counterexample_search(p_bound: u64) -> Result<Vec<PencilWitness>> {
    let mut out = Vec::new();
    for p in sieve_primes(p_bound)? {
        if p % 8 != 7 {
            continue;
        }
        let Some((t0, t1)) = represent_by_pell_form(p) else {
            continue;
        };
        // (t, t² − 2)_p at t = ±t₀/t₁ equals (±t₀t₁, p)_p since
        // t² − 2 = p/t₁² and v_p(t₀t₁) = 0
        let soluble_plus = hilbert_symbol(t0 as i128 * t1 as i128, p as i128, Place::Prime(p))? == 1;
        let soluble_minus =
            hilbert_symbol(-(t0 as i128) * t1 as i128, p as i128, Place::Prime(p))? == 1;
        if soluble_plus != soluble_minus {
            out.push(PencilWitness {
                p,
                t0,
                t1,
                soluble_plus,
                soluble_minus,
            });
        }
    }
    Ok(out)
}

/// A solution of t₀² − 2t₁² = p with t₀, t₁ > 0, if one exists in the
/// searched range.
fn represent_by_pell_form(p: u64) -> Option<(i64, i64)> {
    for t1 in 1..=(p as i64) {
        let rhs = p as i128 + 2 * (t1 as i128) * (t1 as i128);
        let t0 = (rhs as f64).sqrt().round() as i128;
        if t0 * t0 == rhs {
            return Some((t0 as i64, t1));
        }
    }
    None
}

/// Ideal-level detector data for a pencil whose relevant fibre is defined
/// over k_θ = ℚ(√d): a fibre component over a degree-1 prime 𝔭 of k_θ is
/// split exactly when the residue of u + v·√d is a nonzero square in κ(𝔭).
#[derive(Debug, Clone)]
pub struct QuadraticPencil {
    d: i64,
    residue_elt: (i64, i64),
    exceptional: Vec<u64>,
}

impl QuadraticPencil {
    /// `d`: squarefree, ∉ {0, 1}; `residue_elt` = (u, v) for u + v·√d ≠ 0.
    /// The exceptional set S collects the primes dividing 2d and the norm
    /// of the residue element; ϖ_θ is 1 there by convention.
    pub fn new(d: i64, residue_elt: (i64, i64)) -> Result<QuadraticPencil> {
        if d == 0 || d == 1 || squarefree_part(d) != d {
            return Err(Error::domain("d must be a squarefree integer ∉ {0, 1}"));
        }
        let (u, v) = residue_elt;
        if u == 0 && v == 0 {
            return Err(Error::domain("residue element must be nonzero"));
        }
        let norm = u as i128 * u as i128 - d as i128 * v as i128 * v as i128;
        debug_assert!(norm != 0, "d is not a square");
        let mut exceptional = Vec::new();
        let mut fac = Vec::new();
        factor_u64((2 * d).unsigned_abs(), &mut fac);
        exceptional.extend(fac.iter().map(|&(q, _)| q));
        fac.clear();
        factor_u64(norm.unsigned_abs() as u64, &mut fac);
        exceptional.extend(fac.iter().map(|&(q, _)| q));
        exceptional.sort_unstable();
        exceptional.dedup();
        Ok(QuadraticPencil {
            d,
            residue_elt,
            exceptional,
        })
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    /// S: primes where ϖ_θ is 1 by convention.
    pub fn exceptional_primes(&self) -> &[u64] {
        &self.exceptional
    }
}

/// ϖ_θ evaluated on the ideal (x₀ − α·x₁) of ℚ(√d): for every rational
/// prime p ∉ S dividing Norm(x₀ − α·x₁) = x₀² − d·x₁², the dividing prime
/// is the degree-1 ideal 𝔭 = (p, √d − r) with x₀ ≡ r·x₁ mod p, and the
/// summand is 1 exactly when the residue element is a square in κ(𝔭) for
/// all such 𝔭 (completely multiplicatively, so exponents are irrelevant).
pub fn pencil_summand(pencil: &QuadraticPencil, x0: i64, x1: i64) -> Result<bool> {
    if gcd_i64(x0, x1) != 1 {
        return Err(Error::domain("need a primitive pair"));
    }
    let norm = x0 as i128 * x0 as i128 - pencil.d as i128 * x1 as i128 * x1 as i128;
    debug_assert!(norm != 0, "d is not a square");
    if norm.unsigned_abs() > u64::MAX as u128 {
        return Err(Error::Capacity {
            what: "pencil norm factorization",
            needed: norm.unsigned_abs(),
            budget: u64::MAX as u128,
        });
    }
    let mut fac = Vec::new();
    factor_u64(norm.unsigned_abs() as u64, &mut fac);
    let (u, v) = pencil.residue_elt;
    for (p, _) in fac {
        if pencil.exceptional.binary_search(&p).is_ok() {
            continue;
        }
        // p | x₀² − d·x₁² with p ∤ 2d·x₁, so x₀·x₁⁻¹ is a root of d mod p
        debug_assert!(x1.rem_euclid(p as i64) != 0, "pair is primitive");
        let root = (x0 as i128 * invmod(x1.rem_euclid(p as i64) as u64, p) as i128)
            .rem_euclid(p as i128) as u64;
        let split = QuadraticPrimeSplit {
            d: pencil.d,
            p,
            kind: SplitKind::Split { root },
        };
        if residue_symbol_deg1(u, v, &split)? != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn invmod(a: u64, p: u64) -> u64 {
    let (mut r0, mut r1) = (p as i128, (a % p) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1);
    t0.rem_euclid(p as i128) as u64
}

/// Σ over primitive pairs (x₀, x₁) of height ≤ B of the ideal detector
/// ϖ_θ(x₀ − α·x₁) ∈ {0, 1}, one representative per point of ℙ¹(ℚ).
pub fn pencil_detector_sum(pencil: &QuadraticPencil, b: i64) -> Result<u64> {
    if b < 1 {
        return Err(Error::domain("height bound must be ≥ 1"));
    }
    let mut sum = 0u64;
    let mut err: Option<Error> = None;
    super::for_each_projective_pair(b, |x0, x1| {
        if err.is_some() {
            return;
        }
        match pencil_summand(pencil, x0, x1) {
            Ok(true) => sum += 1,
            Ok(false) => {}
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(sum),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::conic_soluble_brute;

    #[test]
    fn search_finds_the_known_witnesses() {
        let ws = pencil_counterexample_search(100).unwrap();
        assert!(ws.len() >= 3);
        let ps: Vec<u64> = ws.iter().map(|w| w.p).collect();
        assert_eq!(ps, vec![7, 23, 31, 47, 71, 79]);
        for w in &ws {
            assert_eq!(
                w.t0 as i128 * w.t0 as i128 - 2 * w.t1 as i128 * w.t1 as i128,
                w.p as i128
            );
            assert_ne!(w.soluble_plus, w.soluble_minus);
        }
        // p = 7: t = 3 insoluble ((3, 7)₇ = −1), t = −3 soluble
        let w7 = ws.iter().find(|w| w.p == 7).unwrap();
        assert_eq!((w7.t0, w7.t1), (3, 1));
        assert!(!w7.soluble_plus);
        assert!(w7.soluble_minus);
        // p = 23: (t₀, t₁) = (5, 1)
        let w23 = ws.iter().find(|w| w.p == 23).unwrap();
        assert_eq!((w23.t0, w23.t1), (5, 1));
        // no admissible prime ≤ 5
        assert!(pencil_counterexample_search(5).unwrap().is_empty());
    }

    #[test]
    fn witness_verdicts_match_brute_force() {
        // x² − t·y² = (t² − 2)·z² over ℚ_p with t = ±t₀/t₁ is equivalent to
        // x² − (±t₀t₁)·y² = p·z²
        for w in pencil_counterexample_search(50).unwrap() {
            let a = w.t0 * w.t1;
            let p = Place::Prime(w.p);
            assert_eq!(
                conic_soluble_brute(a as i128, w.p as i128, p).unwrap(),
                w.soluble_plus,
                "p = {}",
                w.p
            );
            assert_eq!(
                conic_soluble_brute(-a as i128, w.p as i128, p).unwrap(),
                w.soluble_minus,
                "p = {}",
                w.p
            );
        }
    }

    #[test]
    fn summand_distinguishes_conjugate_pairs() {
        // the fibre of the counterexample pencil over θ = √2 tests whether
        // the residue of √2 itself is a square; the two primes of ℚ(√2)
        // above 7 give opposite answers
        let pencil = QuadraticPencil::new(2, (0, 1)).unwrap();
        assert!(!pencil_summand(&pencil, 3, 1).unwrap()); // root 3, (3|7) = −1
        assert!(pencil_summand(&pencil, 3, -1).unwrap()); // root 4, (4|7) = +1
    }

    #[test]
    fn ideal_detector_equals_rational_detector() {
        // x² + y² = f(t)·z² with f = t² − 3: the residue element is a = −1
        // and ϖ_θ(x₀ − α·x₁) must agree with the completely multiplicative
        // rational detector ϖ(|x₀² − 3x₁²|) built from ½(1 + χ₋₄)
        use crate::arith::{spf_factor, SpfTable};
        use crate::frobenian::{DirichletCharacter, FrobenianSpec};
        use crate::multiplicative::indicator_from_prime_set;
        use crate::value::Scalar;

        let pencil = QuadraticPencil::new(3, (-1, 0)).unwrap();
        assert_eq!(pencil.exceptional_primes(), &[2, 3]);
        let chi = DirichletCharacter::from_discriminant(-4).unwrap();
        let half = Scalar::from_ratio(1, 2);
        let base = FrobenianSpec::character_combo(
            vec![(DirichletCharacter::trivial(), half), (chi, half)],
            vec![(2, Scalar::ONE), (3, Scalar::ONE)],
        )
        .unwrap();
        let varpi = indicator_from_prime_set(&base).unwrap();
        let table = SpfTable::new(1 << 17).unwrap();
        super::super::for_each_projective_pair(150, |x0, x1| {
            let ideal = pencil_summand(&pencil, x0, x1).unwrap();
            let f = (x0 as i128 * x0 as i128 - 3 * x1 as i128 * x1 as i128).abs();
            let rational = !varpi.evaluate(&spf_factor(f, &table).unwrap()).is_zero();
            assert_eq!(ideal, rational, "at ({x0}, {x1})");
        });
    }

    #[test]
    fn detector_sum_is_positive_and_monotone() {
        let pencil = QuadraticPencil::new(2, (0, 1)).unwrap();
        let s30 = pencil_detector_sum(&pencil, 30).unwrap();
        let s60 = pencil_detector_sum(&pencil, 60).unwrap();
        assert!(s30 > 0);
        assert!(s60 >= s30);
    }
}
