use std::collections::HashMap;

use num_rational::Ratio;

use super::{for_each_projective_pair, squarefree_part, DeltaExponent, DivisorDelta};
use crate::arith::{
    factor_u64, hilbert_symbol, kronecker_symbol, spf_factor, Place, SpfTable,
};
use crate::correlations::{
    constrained_correlation_sum_normalized, ConstraintSet, LatticeBox,
};
use crate::error::{Error, Result};
use crate::frobenian::{DirichletCharacter, FrobenianSpec};
use crate::local_densities::{LinearForm, LinearFormSystem};
use crate::multiplicative::{indicator_from_prime_set, FrobMultSpec, PrimePowerRule};
use crate::value::Scalar;

/// The family x² − a·y² = L₁(t)^{a₁}···L_r(t)^{a_r}·z² over ℙ¹, with
/// t = x₁/x₀ and 𝐋_j(x₀, x₁) = c_j·x₁ + d_j·x₀ for L_j(t) = c_j·t + d_j.
#[derive(Debug, Clone)]
pub struct ConicBundleFamily {
    a: i64,
    forms: Vec<(i64, i64)>,
    exponents: Vec<u32>,
    s0: Vec<u64>,
}

impl ConicBundleFamily {
    /// `a` is reduced modulo squares (squares are rejected); each form is
    /// (c, d) for L(t) = c·t + d, primitive with c ≠ 0, pairwise
    /// independent.
    pub fn new(a: i64, forms: Vec<(i64, i64)>, exponents: Vec<u32>) -> Result<ConicBundleFamily> {
        if a == 0 {
            return Err(Error::domain("a must be nonzero"));
        }
        let a = squarefree_part(a);
        if a == 1 {
            return Err(Error::domain("a must not be a square"));
        }
        if forms.is_empty() || forms.len() != exponents.len() {
            return Err(Error::domain("need one positive exponent per form"));
        }
        if exponents.iter().any(|&e| e == 0) {
            return Err(Error::domain("exponents must be positive"));
        }
        let mut res_product: i128 = 1;
        for (i, &(c, d)) in forms.iter().enumerate() {
            if c == 0 {
                return Err(Error::domain("forms must be non-constant in t"));
            }
            if super::gcd_i64(c, d) != 1 {
                return Err(Error::domain("forms must be primitive"));
            }
            for &(c2, d2) in &forms[i + 1..] {
                let res = c as i128 * d2 as i128 - c2 as i128 * d as i128;
                if res == 0 {
                    return Err(Error::domain("forms must be pairwise independent"));
                }
                res_product = res_product.saturating_mul(res);
            }
        }
        let mut s0 = Vec::new();
        let mut fac = Vec::new();
        factor_u64((2 * a).unsigned_abs(), &mut fac);
        s0.extend(fac.iter().map(|&(p, _)| p));
        fac.clear();
        factor_u64(res_product.unsigned_abs() as u64, &mut fac);
        s0.extend(fac.iter().map(|&(p, _)| p));
        s0.sort_unstable();
        s0.dedup();
        Ok(ConicBundleFamily {
            a,
            forms,
            exponents,
            s0,
        })
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn forms(&self) -> &[(i64, i64)] {
        &self.forms
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    /// Primes dividing 2a·∏ resultants: outside this set fibre solubility
    /// is governed by the detector functions.
    pub fn discriminant_primes(&self) -> &[u64] {
        &self.s0
    }

    /// D = Σ a_j (all L_j have degree 1).
    pub fn total_degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    /// The right-hand side of the fibre conic modulo squares:
    /// x₀^{D mod 2}·∏ 𝐋_j(x)^{a_j}; zero exactly at the degenerate fibres.
    pub fn verdict_value(&self, x0: i64, x1: i64) -> i128 {
        let mut v: i128 = if self.total_degree() % 2 == 1 {
            x0 as i128
        } else {
            1
        };
        for (&(c, d), &e) in self.forms.iter().zip(&self.exponents) {
            let l = c as i128 * x1 as i128 + d as i128 * x0 as i128;
            for _ in 0..e {
                v = v.saturating_mul(l);
            }
        }
        v
    }

    /// Δ(π): each θ_j with odd exponent contributes δ = ½, even exponents
    /// contribute δ = 1; the fibre at infinity contributes ½ iff D is odd.
    pub fn delta_pi(&self) -> DeltaExponent {
        let half = Ratio::new(1i64, 2);
        let one = Ratio::new(1i64, 1);
        let mut divisors = Vec::new();
        for (j, &e) in self.exponents.iter().enumerate() {
            let delta = if e % 2 == 1 { half } else { one };
            divisors.push(DivisorDelta {
                label: format!("theta_{}", j + 1),
                delta,
                contribution: one - delta,
            });
        }
        let delta_inf = if self.total_degree() % 2 == 1 { half } else { one };
        divisors.push(DivisorDelta {
            label: "infinity".to_string(),
            delta: delta_inf,
            contribution: one - delta_inf,
        });
        DeltaExponent::from_divisors(divisors, true)
    }
}

/// Is the fibre conic x² − a·y² = V·z² soluble at the given place, where
/// V is the verdict value at (x₀ : x₁)?
pub fn conic_fibre_soluble(
    family: &ConicBundleFamily,
    x0: i64,
    x1: i64,
    place: Place,
) -> Result<bool> {
    let v = family.verdict_value(x0, x1);
    if v == 0 {
        return Err(Error::domain("degenerate fibre: verdict value is zero"));
    }
    match place {
        Place::Real => Ok(family.a > 0 || v > 0),
        Place::Prime(_) => Ok(hilbert_symbol(family.a as i128, v, place)? == 1),
    }
}

/// Shared per-count state: a factor table for form values and a memo of
/// Kronecker symbols (a | p) at odd primes away from a.
struct LocalChecker {
    a: i64,
    bad: Vec<u64>,
    kron: HashMap<u64, bool>,
}

impl LocalChecker {
    fn new(family: &ConicBundleFamily) -> LocalChecker {
        let mut bad = vec![2u64];
        let mut fac = Vec::new();
        factor_u64(family.a.unsigned_abs(), &mut fac);
        bad.extend(fac.iter().map(|&(p, _)| p));
        bad.sort_unstable();
        bad.dedup();
        LocalChecker {
            a: family.a,
            bad,
            kron: HashMap::new(),
        }
    }

    /// Everywhere local solubility of x² − a·y² = v·z², v ≠ 0, given v's
    /// prime factorization.
    fn els(&mut self, v: i128, v_factors: &[(u64, u32)]) -> Result<bool> {
        if self.a < 0 && v < 0 {
            return Ok(false);
        }
        for &p in &self.bad {
            if hilbert_symbol(self.a as i128, v, Place::Prime(p))? != 1 {
                return Ok(false);
            }
        }
        for &(p, e) in v_factors {
            if e % 2 == 0 || self.bad.binary_search(&p).is_ok() {
                continue;
            }
            let a = self.a;
            let ok = *self
                .kron
                .entry(p)
                .or_insert_with(|| kronecker_symbol(a as i128, p as i128) == 1);
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Repeated per-fibre verdicts sharing one factor table and one symbol
/// memo; `height_hint` sizes the table for |x₀|, |x₁| ≤ height_hint.
pub struct ConicLocalTester<'a> {
    family: &'a ConicBundleFamily,
    checker: LocalChecker,
    table: SpfTable,
    fac: Vec<(u64, u32)>,
    merged: HashMap<u64, u32>,
}

impl<'a> ConicLocalTester<'a> {
    pub fn new(family: &'a ConicBundleFamily, height_hint: i64) -> Result<ConicLocalTester<'a>> {
        if height_hint < 1 {
            return Err(Error::domain("height hint must be ≥ 1"));
        }
        let max_coeff = family
            .forms
            .iter()
            .map(|&(c, d)| c.unsigned_abs() + d.unsigned_abs())
            .max()
            .unwrap_or(1)
            .max(1);
        let table = SpfTable::new((max_coeff * height_hint as u64).max(2))?;
        Ok(ConicLocalTester {
            family,
            checker: LocalChecker::new(family),
            table,
            fac: Vec::new(),
            merged: HashMap::new(),
        })
    }

    /// The everywhere-local-solubility verdict at (x₀ : x₁); None at the
    /// degenerate fibres.
    pub fn fibre_els(&mut self, x0: i64, x1: i64) -> Result<Option<bool>> {
        let family = self.family;
        let v = family.verdict_value(x0, x1);
        if v == 0 {
            return Ok(None);
        }
        // v = x₀^{D mod 2}·∏𝐋_j^{a_j}: factor the linear pieces, not v
        self.merged.clear();
        if family.total_degree() % 2 == 1 && x0.unsigned_abs() > 1 {
            self.fac.clear();
            self.table.factor_into(x0.unsigned_abs(), &mut self.fac);
            for &(p, e) in &self.fac {
                *self.merged.entry(p).or_insert(0) += e;
            }
        }
        for (&(c, d), &a_j) in family.forms.iter().zip(&family.exponents) {
            let l = (c as i128 * x1 as i128 + d as i128 * x0 as i128).unsigned_abs() as u64;
            if l > 1 {
                self.fac.clear();
                self.table.factor_into(l, &mut self.fac);
                for &(p, e) in &self.fac {
                    *self.merged.entry(p).or_insert(0) += e * a_j;
                }
            }
        }
        let factors: Vec<(u64, u32)> = self.merged.iter().map(|(&p, &e)| (p, e)).collect();
        Ok(Some(self.checker.els(v, &factors)?))
    }
}

/// The everywhere-local-solubility verdict at (x₀ : x₁); None at the
/// degenerate fibres. One-shot convenience around [`ConicLocalTester`].
pub fn conic_fibre_els(family: &ConicBundleFamily, x0: i64, x1: i64) -> Result<Option<bool>> {
    let hint = x0.unsigned_abs().max(x1.unsigned_abs()).max(1) as i64;
    ConicLocalTester::new(family, hint)?.fibre_els(x0, x1)
}

/// Result of a projective fibre count: everywhere locally soluble fibres
/// (equivalently, by the Hasse principle for conics, soluble fibres) and
/// the degenerate fibres that were skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConicCount {
    pub soluble: u64,
    pub skipped_degenerate: u64,
}

/// Counts points (x₀ : x₁) ∈ ℙ¹(ℚ) of height ≤ B whose fibre is soluble
/// at the real place and at every prime (only p | 2a·V need testing).
pub fn count_conic_bundle(family: &ConicBundleFamily, b: i64) -> Result<ConicCount> {
    if b < 1 {
        return Err(Error::domain("height bound must be ≥ 1"));
    }
    let mut tester = ConicLocalTester::new(family, b)?;
    let mut soluble = 0u64;
    let mut skipped = 0u64;
    let mut err: Option<Error> = None;
    for_each_projective_pair(b, |x0, x1| {
        if err.is_some() {
            return;
        }
        match tester.fibre_els(x0, x1) {
            Ok(None) => skipped += 1,
            Ok(Some(true)) => soluble += 1,
            Ok(Some(false)) => {}
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(ConicCount {
            soluble,
            skipped_degenerate: skipped,
        }),
    }
}

/// The same count with the x₀ range split across a thread pool, each
/// worker holding its own factor table and symbol memo; the per-fibre
/// verdicts are independent, so the integer totals are bit-identical to
/// the sequential count for every thread count.
pub fn count_conic_bundle_threaded(
    family: &ConicBundleFamily,
    b: i64,
    threads: usize,
) -> Result<ConicCount> {
    if b < 1 {
        return Err(Error::domain("height bound must be ≥ 1"));
    }
    if threads == 0 {
        return Err(Error::domain("need at least one thread"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::domain(format!("thread pool: {e}")))?;
    let chunk = (b / (4 * threads as i64)).max(1);
    let mut ranges = vec![(0i64, 0i64)]; // the point at infinity
    let mut lo = 1i64;
    while lo <= b {
        let hi = (lo + chunk - 1).min(b);
        ranges.push((lo, hi));
        lo = hi + 1;
    }
    let partials: Vec<Result<ConicCount>> = pool.install(|| {
        use rayon::prelude::*;
        ranges
            .par_iter()
            .map(|&(lo, hi)| {
                let mut tester = ConicLocalTester::new(family, b)?;
                let mut out = ConicCount {
                    soluble: 0,
                    skipped_degenerate: 0,
                };
                let mut step = |x0: i64, x1: i64| -> Result<()> {
                    match tester.fibre_els(x0, x1)? {
                        None => out.skipped_degenerate += 1,
                        Some(true) => out.soluble += 1,
                        Some(false) => {}
                    }
                    Ok(())
                };
                if lo == 0 {
                    step(0, 1)?;
                } else {
                    for x0 in lo..=hi {
                        for x1 in -b..=b {
                            if super::gcd_i64(x0, x1) == 1 {
                                step(x0, x1)?;
                            }
                        }
                    }
                }
                Ok(out)
            })
            .collect()
    });
    let mut total = ConicCount {
        soluble: 0,
        skipped_degenerate: 0,
    };
    for p in partials {
        let p = p?;
        total.soluble += p.soluble;
        total.skipped_degenerate += p.skipped_degenerate;
    }
    Ok(total)
}

/// The detector ϖ_θ of the family: the completely multiplicative indicator
/// of integers all of whose prime factors p satisfy Kronecker(a | p) = +1
/// or lie in S₀ ∪ {p | disc ℚ(√a)} (value 1 there by convention). The
/// same function serves every θ_j since the fibre over θ_j splits over 𝔽_p
/// exactly when a is a square mod p.
pub fn conic_detector_spec(family: &ConicBundleFamily) -> Result<FrobMultSpec> {
    let disc = if family.a.rem_euclid(4) == 1 {
        family.a
    } else {
        4 * family.a
    };
    let chi = DirichletCharacter::from_discriminant(disc)?;
    let mut exceptional: Vec<u64> = family.s0.clone();
    let mut fac = Vec::new();
    factor_u64(disc.unsigned_abs(), &mut fac);
    exceptional.extend(fac.iter().map(|&(p, _)| p));
    exceptional.sort_unstable();
    exceptional.dedup();
    let half = Scalar::from_ratio(1, 2);
    let base = FrobenianSpec::character_combo(
        vec![(DirichletCharacter::trivial(), half), (chi, half)],
        exceptional.into_iter().map(|p| (p, Scalar::ONE)).collect(),
    )?;
    indicator_from_prime_set(&base)
}

/// ∏_{θ ∈ Θ(π)} ϖ_θ(|L_θ(x)|) ∈ {0, 1}: the product over the odd-exponent
/// forms, including x₀ when D is odd; false at zeros of any L_θ.
pub fn detector_product(family: &ConicBundleFamily, x0: i64, x1: i64) -> Result<bool> {
    let varpi = conic_detector_spec(family)?;
    let table = SpfTable::new(1 << 16)?;
    let mut values: Vec<i128> = Vec::new();
    if family.total_degree() % 2 == 1 {
        values.push(x0 as i128);
    }
    for (&(c, d), &e) in family.forms.iter().zip(&family.exponents) {
        if e % 2 == 1 {
            values.push(c as i128 * x1 as i128 + d as i128 * x0 as i128);
        }
    }
    for v in values {
        if v == 0 {
            return Ok(false);
        }
        let f = spf_factor(v.abs(), &table)?;
        if varpi.evaluate(&f).is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The constrained detector sum Σ ∏_θ ϖ_θ(L_θ(x)) over primitive x of
/// height ≤ B close to the anchor, one representative per projective
/// point; a lower-bound certificate for the soluble-fibre count.
///
/// The anchor fibre must itself be nondegenerate and everywhere locally
/// soluble.
pub fn detector_lower_count(
    family: &ConicBundleFamily,
    b: i64,
    constraints: &ConstraintSet,
) -> Result<Scalar> {
    if constraints.anchor.len() != 2 {
        return Err(Error::domain("anchor must be a pair"));
    }
    match conic_fibre_els(family, constraints.anchor[0], constraints.anchor[1])? {
        Some(true) => {}
        Some(false) => return Err(Error::domain("anchor fibre is not everywhere locally soluble")),
        None => return Err(Error::domain("anchor fibre is degenerate")),
    }
    let varpi = conic_detector_spec(family)?;
    let mut forms = Vec::new();
    if family.total_degree() % 2 == 1 {
        forms.push(LinearForm::new(vec![1, 0], 0));
    }
    for (&(c, d), &e) in family.forms.iter().zip(&family.exponents) {
        if e % 2 == 1 {
            forms.push(LinearForm::new(vec![d, c], 0));
        }
    }
    if forms.is_empty() {
        // Θ(π) empty: the detector is identically 1 and the sum is a plain
        // constrained point count
        forms.push(LinearForm::new(vec![1, 0], 0));
        let one = FrobMultSpec::new(
            FrobenianSpec::character_combo(
                vec![(DirichletCharacter::trivial(), Scalar::ONE)],
                vec![],
            )?,
            PrimePowerRule::CompletelyMultiplicative,
            1,
        )?;
        let system = LinearFormSystem::new(forms)?;
        let bx = LatticeBox::symmetric_cube(2, Ratio::new(b, 1))?;
        return constrained_correlation_sum_normalized(&bx, &system, &[one], constraints);
    }
    let system = LinearFormSystem::new(forms)?;
    let specs = vec![varpi; system.r()];
    let bx = LatticeBox::symmetric_cube(2, Ratio::new(b, 1))?;
    constrained_correlation_sum_normalized(&bx, &system, &specs, constraints)
}
