use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::box_region::{for_each_cube_point, LatticeBox};
use super::sum::ValueEvaluator;
use crate::error::{Error, Result};
use crate::local_densities::LinearFormSystem;
use crate::multiplicative::{FrobMultSpec, PrimePowerRule};
use crate::value::Scalar;

/// The side conditions of a constrained correlation sum: primitivity of x
/// and v-adic closeness to a primitive anchor y at the places S ∪ {∞}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub primitivity: bool,
    pub anchor: Vec<i64>,
    pub delta: Ratio<i64>,
    pub primes: Vec<u64>,
}

/// How the p-adic closeness conditions are evaluated; both are exact and
/// must agree pointwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PadicEncoding {
    /// Directly via valuations of the cross terms x_i y_0 − y_i x_0.
    Valuation,
    /// Via the congruence classes mod M = ∏ p^{m_p + 2 v_p(y_0)}.
    Congruence,
}

impl ConstraintSet {
    pub fn new(
        primitivity: bool,
        anchor: Vec<i64>,
        delta: Ratio<i64>,
        mut primes: Vec<u64>,
    ) -> Result<ConstraintSet> {
        if anchor.is_empty() || anchor[0] == 0 {
            return Err(Error::domain("anchor needs a nonzero leading coordinate"));
        }
        let g = anchor.iter().fold(0u64, |g, &a| g.gcd(&a.unsigned_abs()));
        if g != 1 {
            return Err(Error::domain("anchor must be primitive"));
        }
        if delta <= Ratio::new(0, 1) {
            return Err(Error::domain("delta must be positive"));
        }
        primes.sort_unstable();
        primes.dedup();
        if primes.iter().any(|&p| !crate::arith::is_prime_u64(p)) {
            return Err(Error::domain("places must be prime"));
        }
        if !primes.is_empty() && delta >= Ratio::new(1, 1) {
            return Err(Error::domain("p-adic conditions need delta < 1"));
        }
        Ok(ConstraintSet {
            primitivity,
            anchor,
            delta,
            primes,
        })
    }

    /// Largest m with δ ≤ p^{-m+1}; equivalently the least exponent such
    /// that |t|_p < δ ⟺ v_p(t) ≥ m.
    fn level(&self, p: u64) -> u32 {
        // largest e ≥ 0 with p^e ≤ 1/δ, then m = e + 1 (δ < 1 ensures e ≥ 0)
        let num = *self.delta.numer() as u128;
        let den = *self.delta.denom() as u128;
        let mut e = 0u32;
        let mut pe = p as u128;
        while pe * num <= den {
            e += 1;
            pe *= p as u128;
        }
        e + 1
    }

    /// max_i |x_i/x_0 − y_i/y_0| < δ, exact rational comparison.
    fn archimedean_ok(&self, x: &[i64]) -> bool {
        let y = &self.anchor;
        if x[0] == 0 {
            // |x_i/x_0| is unbounded unless x_i = 0 too, which primitivity
            // forbids for all i; a zero leading coordinate never qualifies
            // except in dimension 1 (no ratio conditions)
            return x.len() == 1;
        }
        let dn = *self.delta.numer() as i128;
        let dd = *self.delta.denom() as i128;
        let x0 = x[0] as i128;
        let y0 = y[0] as i128;
        for i in 1..x.len() {
            let cross = (x[i] as i128) * y0 - (y[i] as i128) * x0;
            // |cross| / |x0 y0| < δ
            if cross.unsigned_abs() * (dd as u128)
                >= (dn as u128) * (x0 * y0).unsigned_abs()
            {
                return false;
            }
        }
        true
    }

    fn primitive_ok(&self, x: &[i64]) -> bool {
        let g = x.iter().fold(0u64, |g, &a| g.gcd(&a.unsigned_abs()));
        g == 1
    }

    /// gcd(x, p) = 1 and ∀i |x_i/x_0 − y_i/y_0|_p < δ, by valuations.
    fn padic_ok_valuation(&self, x: &[i64], p: u64) -> bool {
        if x.iter().all(|&xi| xi.rem_euclid(p as i64) == 0) {
            return false;
        }
        let y = &self.anchor;
        let m = self.level(p) as i64;
        let vy0 = crate::arith::padic_valuation(y[0] as i128, p).unwrap() as i64;
        for i in 1..x.len() {
            let cross = (x[i] as i128) * (y[0] as i128) - (y[i] as i128) * (x[0] as i128);
            if cross == 0 {
                continue;
            }
            let vx0 = if x[0] == 0 {
                // v_p(x_0) = ∞: the ratio degenerates, the condition fails
                return false;
            } else {
                crate::arith::padic_valuation(x[0] as i128, p).unwrap() as i64
            };
            let t = crate::arith::padic_valuation(cross, p).unwrap() as i64 - vx0 - vy0;
            if t < m {
                return false;
            }
        }
        true
    }

    /// The same condition read off from x mod p^{m + 2 v_p(y_0)}, following
    /// the congruence encoding (case split on p | x_0).
    fn padic_ok_congruence(&self, x: &[i64], p: u64) -> bool {
        let y = &self.anchor;
        let m = self.level(p);
        let r = crate::arith::padic_valuation(y[0] as i128, p).unwrap();
        let modulus = (p as i128).pow(m + 2 * r);
        let xm: Vec<i128> = x.iter().map(|&xi| (xi as i128).rem_euclid(modulus)).collect();
        if xm.iter().all(|&xi| xi % p as i128 == 0) {
            return false; // gcd(x, p) > 1 (residues determine this mod p)
        }
        if xm[0] % p as i128 != 0 {
            // p ∤ x_0: x_i ≡ (y_i/y_0) x_0 mod p^m for all i
            if r > 0 {
                return false; // |y_i/y_0|_p > 1 for some unit coordinate y_i
            }
            let pm = (p as i128).pow(m);
            let inv = mod_inverse(y[0] as i128, pm);
            return (1..x.len())
                .all(|i| (xm[i] - (y[i] as i128) * inv * xm[0]).rem_euclid(pm) == 0);
        }
        // p | x_0: pick the first unit coordinate x_j
        let j = (1..x.len())
            .find(|&i| xm[i] % p as i128 != 0)
            .expect("a unit coordinate exists");
        if r == 0 {
            return false; // |x_j/x_0|_p > 1 = |y_j/y_0|_p is incompatible
        }
        let vyj = crate::arith::padic_valuation(y[j] as i128, p).unwrap();
        if vyj >= r {
            return false; // |x_j/x_0|_p = |y_j/y_0|_p is impossible
        }
        // x_0 y_j ≡ x_j y_0 mod p^{m + s}, s = v_p(y_0²/y_j)
        let s = 2 * r - vyj;
        let pms = (p as i128).pow(m + s);
        if (xm[0] * y[j] as i128 - xm[j] * y[0] as i128).rem_euclid(pms) != 0 {
            return false;
        }
        // remaining coordinates: x_i y_j ≡ y_i x_j mod p^{m + r}
        let pmr = (p as i128).pow(m + r);
        (1..x.len()).filter(|&i| i != j).all(|i| {
            (xm[i] * y[j] as i128 - (y[i] as i128) * xm[j]).rem_euclid(pmr) == 0
        })
    }

    /// All constraints at once, with the chosen p-adic encoding.
    pub fn satisfied(&self, x: &[i64], encoding: PadicEncoding) -> bool {
        debug_assert_eq!(x.len(), self.anchor.len());
        if self.primitivity && !self.primitive_ok(x) {
            return false;
        }
        if !self.archimedean_ok(x) {
            return false;
        }
        self.primes.iter().all(|&p| match encoding {
            PadicEncoding::Valuation => self.padic_ok_valuation(x, p),
            PadicEncoding::Congruence => self.padic_ok_congruence(x, p),
        })
    }
}

fn mod_inverse(a: i128, m: i128) -> i128 {
    // extended Euclid; a must be a unit mod m
    let (mut old_r, mut r) = (a.rem_euclid(m), m);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    old_s.rem_euclid(m)
}

fn check_completely_multiplicative(specs: &[FrobMultSpec]) -> Result<()> {
    for s in specs {
        match s.rule() {
            PrimePowerRule::CompletelyMultiplicative | PrimePowerRule::IndicatorSet => {}
            _ => {
                return Err(Error::domain(
                    "constrained sums require completely multiplicative specs",
                ))
            }
        }
    }
    Ok(())
}

/// Σ over x in the box satisfying the constraints of ∏_j ρ_j(L_j(x)),
/// with completely multiplicative specs.
pub fn constrained_correlation_sum(
    bx: &LatticeBox,
    system: &LinearFormSystem,
    specs: &[FrobMultSpec],
    constraints: &ConstraintSet,
) -> Result<Scalar> {
    constrained_correlation_sum_with(bx, system, specs, constraints, PadicEncoding::Valuation, false)
}

/// Same sum restricted to representatives whose first nonzero coordinate is
/// positive: exactly one per ±pair, giving exact projective counts.
pub fn constrained_correlation_sum_normalized(
    bx: &LatticeBox,
    system: &LinearFormSystem,
    specs: &[FrobMultSpec],
    constraints: &ConstraintSet,
) -> Result<Scalar> {
    constrained_correlation_sum_with(bx, system, specs, constraints, PadicEncoding::Valuation, true)
}

pub fn constrained_correlation_sum_with(
    bx: &LatticeBox,
    system: &LinearFormSystem,
    specs: &[FrobMultSpec],
    constraints: &ConstraintSet,
    encoding: PadicEncoding,
    first_nonzero_positive: bool,
) -> Result<Scalar> {
    if system.s() != bx.dimension() {
        return Err(Error::domain("system arity must match box dimension"));
    }
    if specs.len() != system.r() {
        return Err(Error::domain("need one spec per form"));
    }
    if constraints.anchor.len() != bx.dimension() {
        return Err(Error::domain("anchor arity must match box dimension"));
    }
    check_completely_multiplicative(specs)?;
    let n = bx.cube_size();
    if n > super::sum::DEFAULT_POINT_BUDGET {
        return Err(Error::Capacity {
            what: "constrained correlation sum enumeration",
            needed: n,
            budget: super::sum::DEFAULT_POINT_BUDGET,
        });
    }
    let bounds = bx.integer_bounds();
    let ev = ValueEvaluator::new(system, &bounds)?;
    let mut acc = Scalar::ZERO;
    let mut err: Option<Error> = None;
    for_each_cube_point(&bounds, |x| {
        if err.is_some() || !bx.contains(x) {
            return;
        }
        if first_nonzero_positive {
            match x.iter().find(|&&xi| xi != 0) {
                Some(&xi) if xi > 0 => {}
                _ => return,
            }
        }
        if !constraints.satisfied(x, encoding) {
            return;
        }
        match ev.product_at(system, specs, x) {
            Ok(s) => acc = acc.add(&s),
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}
