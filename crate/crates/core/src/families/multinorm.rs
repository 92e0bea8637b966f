use std::collections::{HashMap, HashSet};

use num_rational::Ratio;
use num_traits::{Signed, Zero};

use super::{for_each_projective_pair, squarefree_part, DeltaExponent, DivisorDelta};
use crate::arith::{
    factor_u64, hilbert_symbol, kronecker_symbol, sieve_primes, spf_factor, splitting_pattern,
    FactoredInteger, Place, SpfTable,
};
use crate::error::{Error, Result};
use crate::frobenian::poly_discriminant;

/// The family Norm_{E/ℚ}(t) = L₁(x)^{a₁}···L_r(x)^{a_r} over ℙ¹, E a
/// product of number fields E_i = ℚ[x]/(g_i), homogenized with t = x₁/x₀,
/// 𝐋_j = c_j·x₁ + d_j·x₀, and the extra form 𝐋₀ = x₀ carrying the exponent
/// a₀ ∈ {1, …, e} with a₀ ≡ −r mod e, e = gcd of the degrees.
#[derive(Debug, Clone)]
pub struct MultinormFamily {
    fields: Vec<Vec<i64>>,
    forms: Vec<(i64, i64)>,
    exponents: Vec<u32>,
    e: u32,
    a0: u32,
    discs: Vec<i128>,
    disc_primes: Vec<u64>,
    /// Fundamental discriminant per field when it is quadratic.
    quad_fund: Vec<Option<i64>>,
    /// Does some E_i embed into ℝ (then every real number is a norm)?
    has_real_embedding: bool,
}

/// The verdict of a local norm test at one prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalNorm {
    Norm,
    NotNorm,
    Undetermined,
}

/// Per-fibre verdict of the everywhere-local-norm test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultinormStatus {
    /// The product of forms vanishes; excluded from counts.
    Degenerate,
    /// Certified a local norm at every relevant place.
    Soluble,
    /// Certified not a local norm at some place.
    Insoluble,
    /// At least one place could not be certified either way.
    Undetermined,
}

impl MultinormFamily {
    /// `fields`: monic irreducible integer polynomials (coefficients
    /// ascending); `forms`: (c, d) for L(t) = c·t + d, primitive with
    /// c ≠ 0, pairwise independent; `exponents`: positive.
    pub fn new(
        fields: Vec<Vec<i64>>,
        forms: Vec<(i64, i64)>,
        exponents: Vec<u32>,
    ) -> Result<MultinormFamily> {
        if fields.is_empty() {
            return Err(Error::domain("need at least one field"));
        }
        if forms.is_empty() || forms.len() != exponents.len() {
            return Err(Error::domain("need one positive exponent per form"));
        }
        if exponents.iter().any(|&e| e == 0) {
            return Err(Error::domain("exponents must be positive"));
        }
        for (i, &(c, d)) in forms.iter().enumerate() {
            if c == 0 {
                return Err(Error::domain("forms must be non-constant in t"));
            }
            if super::gcd_i64(c, d) != 1 {
                return Err(Error::domain("forms must be primitive"));
            }
            for &(c2, d2) in &forms[i + 1..] {
                if c as i128 * d2 as i128 - c2 as i128 * d as i128 == 0 {
                    return Err(Error::domain("forms must be pairwise independent"));
                }
            }
        }
        let mut discs = Vec::new();
        let mut quad_fund = Vec::new();
        let mut disc_primes = Vec::new();
        let mut has_real_embedding = false;
        let mut degree_gcd: u32 = 0;
        for g in &fields {
            if g.len() < 2 || *g.last().unwrap() != 1 {
                return Err(Error::domain("fields need monic polynomials of degree ≥ 1"));
            }
            certify_irreducible(g)?;
            let n = (g.len() - 1) as u32;
            degree_gcd = gcd_u32(degree_gcd, n);
            let disc = poly_discriminant(g)?;
            if n % 2 == 1 || real_root_count(g) > 0 {
                has_real_embedding = true;
            }
            quad_fund.push(if n == 2 {
                Some(fundamental_discriminant(disc as i64))
            } else {
                None
            });
            let mut fac = Vec::new();
            factor_u64(disc.unsigned_abs() as u64, &mut fac);
            disc_primes.extend(fac.iter().map(|&(p, _)| p));
            discs.push(disc);
        }
        disc_primes.sort_unstable();
        disc_primes.dedup();
        let e = degree_gcd;
        let r = forms.len() as u32;
        let m = (e - r % e) % e;
        let a0 = if m == 0 { e } else { m };
        Ok(MultinormFamily {
            fields,
            forms,
            exponents,
            e,
            a0,
            discs,
            disc_primes,
            quad_fund,
            has_real_embedding,
        })
    }

    pub fn fields(&self) -> &[Vec<i64>] {
        &self.fields
    }

    pub fn forms(&self) -> &[(i64, i64)] {
        &self.forms
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    /// gcd of the field degrees.
    pub fn degree_gcd(&self) -> u32 {
        self.e
    }

    /// The exponent of the form 𝐋₀ = x₀ at infinity.
    pub fn infinity_exponent(&self) -> u32 {
        self.a0
    }

    pub fn discriminant_primes(&self) -> &[u64] {
        &self.disc_primes
    }

    /// x₀^{a₀}·∏𝐋_j(x)^{a_j}, zero exactly at the degenerate fibres.
    pub fn fibre_value(&self, x0: i64, x1: i64) -> Option<i128> {
        let mut v: i128 = 1;
        for _ in 0..self.a0 {
            v = v.checked_mul(x0 as i128)?;
        }
        for (&(c, d), &e) in self.forms.iter().zip(&self.exponents) {
            let l = c as i128 * x1 as i128 + d as i128 * x0 as i128;
            for _ in 0..e {
                v = v.checked_mul(l)?;
            }
        }
        Some(v)
    }

    /// Δ(π) = Σ_{j=0}^{r} (1 − dens P_j) with P_j = {p : f_p | a_j};
    /// exact by residue counting when every field has degree ≤ 2, else
    /// estimated over a window of primes (exactness flag cleared).
    pub fn delta_pi(&self) -> Result<DeltaExponent> {
        let all_small = self.fields.iter().all(|g| g.len() <= 3);
        let mut exps = vec![("infinity".to_string(), self.a0)];
        for (j, &a) in self.exponents.iter().enumerate() {
            exps.push((format!("theta_{}", j + 1), a));
        }
        let mut divisors = Vec::new();
        if all_small {
            // f_p ∈ {1, 2}: dens{f_p | a} = 1 for even a; for odd a it is
            // the density of units u (mod lcm of conductors) where some
            // quadratic character is +1, or 1 outright if a degree-1
            // field is present
            let has_linear = self.fields.iter().any(|g| g.len() == 2);
            let fund: Vec<i64> = self.quad_fund.iter().flatten().copied().collect();
            let split_density = if has_linear {
                Ratio::new(1, 1)
            } else {
                some_character_positive_density(&fund)?
            };
            for (label, a) in exps {
                let dens = if a % 2 == 0 {
                    Ratio::new(1, 1)
                } else {
                    split_density
                };
                divisors.push(DivisorDelta {
                    label,
                    delta: dens,
                    contribution: Ratio::new(1, 1) - dens,
                });
            }
            return Ok(DeltaExponent::from_divisors(divisors, true));
        }
        // empirical window estimate of dens{f_p | a}
        let primes = sieve_primes(200_000)?;
        let mut counts: Vec<i64> = vec![0; exps.len()];
        let mut total: i64 = 0;
        for &p in primes.iter().filter(|&&p| p > 50_000) {
            if self.disc_primes.contains(&p) {
                continue;
            }
            let mut f_p: u32 = 0;
            for g in &self.fields {
                let pat = splitting_pattern(g, p)?;
                for &d in &pat.degrees {
                    f_p = gcd_u32(f_p, d);
                }
            }
            total += 1;
            for (k, &(_, a)) in exps.iter().enumerate() {
                if a % f_p == 0 {
                    counts[k] += 1;
                }
            }
        }
        for ((label, _), cnt) in exps.into_iter().zip(counts) {
            let dens = Ratio::new(cnt, total);
            divisors.push(DivisorDelta {
                label,
                delta: dens,
                contribution: Ratio::new(1, 1) - dens,
            });
        }
        Ok(DeltaExponent::from_divisors(divisors, false))
    }
}

/// Density of units u modulo the lcm of the |D_i| where some Kronecker
/// character χ_{D_i}(u) equals +1 (the splitting density of a product of
/// quadratic fields).
fn some_character_positive_density(fund: &[i64]) -> Result<Ratio<i64>> {
    if fund.is_empty() {
        return Err(Error::domain("no quadratic fields"));
    }
    let mut q: i64 = 1;
    for &d in fund {
        q = lcm_i64(q, d.abs());
    }
    let mut hits: i64 = 0;
    let mut units: i64 = 0;
    for u in 1..=q {
        if super::gcd_i64(u, q) != 1 {
            continue;
        }
        units += 1;
        if fund.iter().any(|&d| kronecker_symbol(d as i128, u as i128) == 1) {
            hits += 1;
        }
    }
    Ok(Ratio::new(hits, units))
}

fn lcm_i64(a: i64, b: i64) -> i64 {
    a / super::gcd_i64(a, b) * b
}

fn gcd_u32(a: u32, b: u32) -> u32 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Fundamental discriminant of ℚ(√d): the squarefree part, times 4 when
/// that is ≢ 1 mod 4.
fn fundamental_discriminant(d: i64) -> i64 {
    let sf = squarefree_part(d);
    if sf.rem_euclid(4) == 1 {
        sf
    } else {
        4 * sf
    }
}

/// Is n a square in ℚ_p?
fn is_padic_square(n: i128, p: u64) -> bool {
    debug_assert!(n != 0);
    let mut u = n;
    let pi = p as i128;
    let mut v = 0u32;
    while u % pi == 0 {
        u /= pi;
        v += 1;
    }
    if v % 2 == 1 {
        return false;
    }
    if p == 2 {
        u.rem_euclid(8) == 1
    } else {
        kronecker_symbol(u.rem_euclid(pi), pi) == 1
    }
}

/// Certifies irreducibility over ℚ: rational-root exclusion settles
/// degrees ≤ 3; higher degrees intersect the possible factor degrees read
/// off splitting patterns at unramified primes.
fn certify_irreducible(g: &[i64]) -> Result<()> {
    let n = g.len() - 1;
    if n == 1 {
        return Ok(());
    }
    if g[0] == 0 {
        return Err(Error::domain("polynomial has the root 0"));
    }
    let mut divs = Vec::new();
    let mut fac = Vec::new();
    factor_u64(g[0].unsigned_abs(), &mut fac);
    collect_divisors(&fac, 0, 1, &mut divs);
    for d in divs {
        for root in [d as i64, -(d as i64)] {
            let mut val: i128 = 0;
            for &c in g.iter().rev() {
                val = val * root as i128 + c as i128;
            }
            if val == 0 {
                return Err(Error::domain("polynomial has a rational root"));
            }
        }
    }
    if n <= 3 {
        return Ok(());
    }
    if n == 4 {
        // linear factors are excluded, so only a product of two quadratics
        // remains; search it exactly (x⁴ + 1 factors modulo every prime,
        // so the splitting-pattern certificate below cannot settle quartics)
        return if has_quadratic_factorization(g) {
            Err(Error::domain("polynomial splits into two quadratics"))
        } else {
            Ok(())
        };
    }
    let disc = poly_discriminant(g)?;
    // bitmask of conceivable proper factor degrees 1..n−1
    let mut possible: u64 = ((1u64 << n) - 1) & !1;
    for p in sieve_primes(500)? {
        if disc.rem_euclid(p as i128) == 0 {
            continue;
        }
        let pat = splitting_pattern(g, p)?;
        // subset sums of the factor degrees mod p
        let mut sums: u64 = 1;
        for &d in &pat.degrees {
            sums |= sums << d;
        }
        possible &= sums;
        if possible & !(1 | (1u64 << n)) == 0 {
            return Ok(());
        }
    }
    Err(Error::domain(
        "could not certify irreducibility from splitting patterns",
    ))
}

/// Does the monic quartic split as (x² + ax + b)(x² + cx + d) over ℤ?
fn has_quadratic_factorization(g: &[i64]) -> bool {
    debug_assert_eq!(g.len(), 5);
    let (g0, g1, g2, g3) = (g[0] as i128, g[1] as i128, g[2] as i128, g[3] as i128);
    let mut divs = Vec::new();
    let mut fac = Vec::new();
    factor_u64(g0.unsigned_abs() as u64, &mut fac);
    collect_divisors(&fac, 0, 1, &mut divs);
    for b0 in divs {
        for b in [b0 as i128, -(b0 as i128)] {
            let d = g0 / b;
            // a + c = g₃, ac = g₂ − b − d, ad + bc = g₁
            let q = g2 - b - d;
            let disc = g3 * g3 - 4 * q;
            if disc < 0 {
                continue;
            }
            let r = (disc as f64).sqrt().round() as i128;
            let r = [r - 1, r, r + 1]
                .into_iter()
                .find(|&s| s >= 0 && s * s == disc);
            let Some(r) = r else { continue };
            for a2 in [g3 + r, g3 - r] {
                if a2 % 2 != 0 {
                    continue;
                }
                let a = a2 / 2;
                let c = g3 - a;
                if a * d + b * c == g1 {
                    return true;
                }
            }
        }
    }
    false
}

fn collect_divisors(fac: &[(u64, u32)], i: usize, cur: u64, out: &mut Vec<u64>) {
    if i == fac.len() {
        out.push(cur);
        return;
    }
    let mut q = 1u64;
    for _ in 0..=fac[i].1 {
        collect_divisors(fac, i + 1, cur * q, out);
        q *= fac[i].0;
    }
}

/// Number of real roots of a squarefree integer polynomial, by Sturm's
/// theorem over exact rationals.
fn real_root_count(g: &[i64]) -> usize {
    type Q = Ratio<i128>;
    let trim = |mut v: Vec<Q>| -> Vec<Q> {
        while v.last().map_or(false, |c| c.is_zero()) {
            v.pop();
        }
        v
    };
    let p0: Vec<Q> = trim(g.iter().map(|&c| Ratio::from_integer(c as i128)).collect());
    if p0.len() <= 1 {
        return 0;
    }
    let p1: Vec<Q> = trim(
        g.iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| Ratio::from_integer(c as i128 * i as i128))
            .collect(),
    );
    let mut chain = vec![p0, p1];
    loop {
        let k = chain.len();
        let (a, b) = (chain[k - 2].clone(), chain[k - 1].clone());
        if b.len() <= 1 {
            break;
        }
        // remainder of a by b, negated
        let mut rem = a;
        while rem.len() >= b.len() {
            let q = *rem.last().unwrap() / *b.last().unwrap();
            let shift = rem.len() - b.len();
            for (i, c) in b.iter().enumerate() {
                let t = rem[i + shift] - q * c;
                rem[i + shift] = t;
            }
            rem = trim(rem);
            if rem.is_empty() {
                break;
            }
        }
        if rem.is_empty() {
            break;
        }
        chain.push(rem.iter().map(|c| -c).collect());
    }
    let variations = |at_plus_infinity: bool| -> usize {
        let mut signs = Vec::new();
        for poly in &chain {
            if poly.is_empty() {
                continue;
            }
            let lead = *poly.last().unwrap();
            let mut s = if lead.is_positive() { 1i32 } else { -1 };
            if !at_plus_infinity && (poly.len() - 1) % 2 == 1 {
                s = -s;
            }
            signs.push(s);
        }
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    };
    variations(false) - variations(true)
}

/// Norm of y(α) in ℚ[x]/(g), g monic: the determinant of multiplication
/// by y on the power basis, by fraction-free (Bareiss) elimination.
fn field_norm(g: &[i64], y: &[i128]) -> i128 {
    let n = g.len() - 1;
    // columns: x^j·y(x) mod g
    let mut col: Vec<i128> = vec![0; n];
    for (i, &c) in y.iter().enumerate() {
        col[i] = c;
    }
    let mut m = vec![vec![0i128; n]; n];
    for j in 0..n {
        for i in 0..n {
            m[i][j] = col[i];
        }
        if j + 1 < n {
            // multiply by x and reduce: x^n ≡ −Σ g_k x^k
            let top = col[n - 1];
            for i in (1..n).rev() {
                col[i] = col[i - 1] - top * g[i] as i128;
            }
            col[0] = -top * g[0] as i128;
        }
    }
    bareiss_det(m)
}

fn bareiss_det(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            let swap = (k + 1..n).find(|&i| m[i][k] != 0);
            match swap {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

fn powmod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * a as u128) % m as u128) as u64;
        }
        a = ((a as u128 * a as u128) % m as u128) as u64;
        e >>= 1;
    }
    r
}

fn invmod(a: u64, m: u64) -> u64 {
    // extended Euclid; a must be a unit
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1);
    t0.rem_euclid(m as i128) as u64
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// A sampled approximation to the image of the norm map of one completed
/// field inside ℚ_p^× / (1 + p^{k₀}ℤ_p): the valuation lattice dℤ with a
/// pivot of valuation d, and the generated unit-class subgroup mod p^{k₀}.
#[derive(Debug, Clone)]
struct SampledGroup {
    modulus: u64,
    d: u32,
    pivot_unit: u64,
    units: HashSet<u64>,
}

impl SampledGroup {
    /// None when the required precision exceeds the enumeration budget.
    fn build(g: &[i64], p: u64, k0: u32) -> Option<SampledGroup> {
        let mut modulus: u64 = 1;
        for _ in 0..k0 {
            modulus = modulus.checked_mul(p)?;
            if modulus > 10_000_000 {
                return None;
            }
        }
        let n = g.len() - 1;
        // coefficient box sized to a few tens of thousands of samples
        let mut s: i64 = 1;
        while ((2 * (s + 1) + 1) as f64).powi(n as i32) <= 40_000.0 {
            s += 1;
        }
        let mut samples: Vec<(u32, u64)> = Vec::new();
        let mut y = vec![-s; n];
        loop {
            if y.iter().any(|&c| c != 0) {
                let norm = field_norm(g, &y.iter().map(|&c| c as i128).collect::<Vec<_>>());
                if norm != 0 {
                    let mut u = norm;
                    let mut v = 0u32;
                    while u % p as i128 == 0 {
                        u /= p as i128;
                        v += 1;
                    }
                    samples.push((v, u.rem_euclid(modulus as i128) as u64));
                }
            }
            let mut i = 0;
            loop {
                if i == n {
                    y.clear();
                    break;
                }
                y[i] += 1;
                if y[i] <= s {
                    break;
                }
                y[i] = -s;
                i += 1;
            }
            if y.is_empty() {
                break;
            }
        }
        // pivot: an element of minimal positive sampled valuation d, built
        // multiplicatively from extended-gcd combinations
        let mut d: u32 = 0;
        let mut pivot_unit: u64 = 1;
        for &(v, u) in &samples {
            if v == 0 {
                continue;
            }
            if d == 0 {
                d = v;
                pivot_unit = u;
            } else if v % d != 0 {
                let (g2, a, b) = ext_gcd(d as i128, v as i128);
                pivot_unit = mulmod(
                    pow_signed(pivot_unit, a, modulus),
                    pow_signed(u, b, modulus),
                    modulus,
                );
                d = g2 as u32;
            }
        }
        // unit-class generators relative to the pivot
        let mut gens: Vec<u64> = Vec::new();
        for &(v, u) in &samples {
            let gen = if v == 0 {
                u
            } else {
                mulmod(u, invmod(powmod(pivot_unit, (v / d) as u64, modulus), modulus), modulus)
            };
            if gen != 1 {
                gens.push(gen);
            }
        }
        gens.sort_unstable();
        gens.dedup();
        let units = subgroup_closure(&gens, modulus);
        Some(SampledGroup {
            modulus,
            d,
            pivot_unit,
            units,
        })
    }

    fn contains(&self, v: u32, unit: u64) -> bool {
        if self.d == 0 {
            return v == 0 && self.units.contains(&unit);
        }
        if v % self.d != 0 {
            return false;
        }
        let adj = mulmod(
            unit,
            invmod(powmod(self.pivot_unit, (v / self.d) as u64, self.modulus), self.modulus),
            self.modulus,
        );
        self.units.contains(&adj)
    }

    /// Index of the sampled group in ℚ_p^× / (1 + p^{k₀}): d·φ(p^{k₀})/|H|,
    /// or None when no positive valuation was reached.
    fn index(&self, p: u64) -> Option<u64> {
        if self.d == 0 {
            return None;
        }
        let phi = self.modulus / p * (p - 1);
        Some(self.d as u64 * (phi / self.units.len() as u64))
    }
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_signed(base: u64, e: i128, m: u64) -> u64 {
    if e >= 0 {
        powmod(base, e as u64, m)
    } else {
        powmod(invmod(base, m), (-e) as u64, m)
    }
}

fn subgroup_closure(gens: &[u64], m: u64) -> HashSet<u64> {
    let mut set: HashSet<u64> = HashSet::new();
    set.insert(1);
    let mut frontier = vec![1u64];
    while let Some(x) = frontier.pop() {
        for &g in gens {
            let y = mulmod(x, g, m);
            if set.insert(y) {
                frontier.push(y);
            }
        }
    }
    set
}

/// How to decide "is x a local norm from ∏E_i ⊗ ℚ_p" at one fixed p.
#[derive(Debug, Clone)]
enum PrimeDecision {
    /// Some completion surjects (a degree-1 prime, a split quadratic, an
    /// unramified field with coprime residue degrees, ramified quadratics
    /// with independent characters, …): everything is a norm.
    AlwaysNorm,
    /// All fields unramified: norm ⟺ f | v_p(x), with f the gcd of the
    /// per-field residue-degree gcds.
    ValuationTest { f: u32 },
    /// All fields ramified quadratics with the same local character:
    /// norm ⟺ (d, x)_p = +1.
    QuadChar { d: i64 },
    /// Ramified fields of degree > 2 present: sound certification via
    /// sampled norm subgroups (plus any unramified-valuation and
    /// quadratic-kernel shortcuts); `certified` marks the cases where the
    /// sampled subgroup provably equals the norm group, making the
    /// negative answer exact.
    Sampled {
        unram_f: Option<u32>,
        quad_chars: Vec<i64>,
        groups: Vec<SampledGroup>,
        certified: bool,
    },
}

/// Repeated local-norm and per-fibre tests for one family, sharing a
/// factor table and per-prime decision data.
pub struct MultinormTester<'a> {
    family: &'a MultinormFamily,
    table: SpfTable,
    decisions: HashMap<u64, PrimeDecision>,
}

impl<'a> MultinormTester<'a> {
    pub fn new(family: &'a MultinormFamily, height_hint: i64) -> Result<MultinormTester<'a>> {
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
        Ok(MultinormTester {
            family,
            table,
            decisions: HashMap::new(),
        })
    }

    fn decision(&mut self, p: u64) -> Result<&PrimeDecision> {
        if !self.decisions.contains_key(&p) {
            let d = classify_prime(self.family, p)?;
            self.decisions.insert(p, d);
        }
        Ok(&self.decisions[&p])
    }

    /// Is the (nonzero) value a norm from ∏E_i ⊗ ℚ_p?
    pub fn local_test(&mut self, value: &FactoredInteger, p: u64) -> Result<LocalNorm> {
        if value.sign == 0 {
            return Err(Error::domain("local norm test needs a nonzero value"));
        }
        let v = value.valuation(p);
        match self.decision(p)? {
            PrimeDecision::AlwaysNorm => Ok(LocalNorm::Norm),
            PrimeDecision::ValuationTest { f } => Ok(if v % *f == 0 {
                LocalNorm::Norm
            } else {
                LocalNorm::NotNorm
            }),
            PrimeDecision::QuadChar { d } => Ok(if hilbert_factored(*d, value, p)? == 1 {
                LocalNorm::Norm
            } else {
                LocalNorm::NotNorm
            }),
            PrimeDecision::Sampled {
                unram_f,
                quad_chars,
                groups,
                certified,
            } => {
                if let Some(f) = unram_f {
                    if v % *f == 0 {
                        return Ok(LocalNorm::Norm);
                    }
                }
                for &d in quad_chars {
                    if hilbert_factored(d, value, p)? == 1 {
                        return Ok(LocalNorm::Norm);
                    }
                }
                for gr in groups {
                    if gr.contains(v, unit_part_mod(value, p, gr.modulus)) {
                        return Ok(LocalNorm::Norm);
                    }
                }
                Ok(if *certified {
                    LocalNorm::NotNorm
                } else {
                    LocalNorm::Undetermined
                })
            }
        }
    }

    /// Verdict of the everywhere-local-norm test at (x₀ : x₁): the real
    /// place plus all p dividing the value or a discriminant.
    pub fn fibre_status(&mut self, x0: i64, x1: i64) -> Result<MultinormStatus> {
        let family = self.family;
        let value = match family.fibre_value(x0, x1) {
            Some(v) => v,
            None => {
                return Err(Error::Capacity {
                    what: "multinorm fibre value",
                    needed: u128::MAX,
                    budget: i128::MAX as u128,
                })
            }
        };
        if value == 0 {
            return Ok(MultinormStatus::Degenerate);
        }
        if value < 0 && !family.has_real_embedding {
            return Ok(MultinormStatus::Insoluble);
        }
        // factor the value through its linear pieces
        let mut merged: HashMap<u64, u32> = HashMap::new();
        let mut add = |n: i128, mult: u32, table: &SpfTable| -> Result<()> {
            if n.unsigned_abs() > 1 {
                let f = spf_factor(n.abs(), table)?;
                for (p, e) in f.factors {
                    *merged.entry(p).or_insert(0) += e * mult;
                }
            }
            Ok(())
        };
        add(x0 as i128, family.a0, &self.table)?;
        for (&(c, d), &e) in family.forms.iter().zip(&family.exponents) {
            add(c as i128 * x1 as i128 + d as i128 * x0 as i128, e, &self.table)?;
        }
        let mut factors: Vec<(u64, u32)> = merged.into_iter().collect();
        factors.sort_unstable();
        let fac_value = FactoredInteger {
            value,
            sign: if value < 0 { -1 } else { 1 },
            factors,
        };
        let mut places: Vec<u64> = fac_value.factors.iter().map(|&(p, _)| p).collect();
        places.extend_from_slice(&family.disc_primes);
        places.sort_unstable();
        places.dedup();
        let mut undetermined = false;
        for p in places {
            match self.local_test(&fac_value, p)? {
                LocalNorm::Norm => {}
                LocalNorm::NotNorm => return Ok(MultinormStatus::Insoluble),
                LocalNorm::Undetermined => undetermined = true,
            }
        }
        Ok(if undetermined {
            MultinormStatus::Undetermined
        } else {
            MultinormStatus::Soluble
        })
    }
}

/// (d, value)_p from the factorization of the value, by multiplicativity.
fn hilbert_factored(d: i64, value: &FactoredInteger, p: u64) -> Result<i32> {
    let mut acc = 1i32;
    if value.sign < 0 {
        acc *= hilbert_symbol(d as i128, -1, Place::Prime(p))?;
    }
    for &(q, e) in &value.factors {
        if e % 2 == 1 {
            acc *= hilbert_symbol(d as i128, q as i128, Place::Prime(p))?;
        }
    }
    Ok(acc)
}

/// value / p^{v_p(value)} reduced mod m (a power of p).
fn unit_part_mod(value: &FactoredInteger, p: u64, m: u64) -> u64 {
    let mut r: u64 = if value.sign < 0 { m - 1 } else { 1 };
    for &(q, e) in &value.factors {
        if q != p {
            r = mulmod(r, powmod(q % m, e as u64, m), m);
        }
    }
    r
}

fn classify_prime(family: &MultinormFamily, p: u64) -> Result<PrimeDecision> {
    let mut unram_f: Option<u32> = None;
    let mut quad_chars: Vec<i64> = Vec::new();
    let mut general: Vec<usize> = Vec::new();
    for (i, g) in family.fields.iter().enumerate() {
        let n = (g.len() - 1) as u32;
        if n == 1 {
            return Ok(PrimeDecision::AlwaysNorm);
        }
        if let Some(fund) = family.quad_fund[i] {
            if fund.rem_euclid(p as i64) == 0 {
                quad_chars.push(fund);
            } else if kronecker_symbol(fund as i128, p as i128) == 1 {
                return Ok(PrimeDecision::AlwaysNorm);
            } else {
                unram_f = Some(unram_f.map_or(2, |f| gcd_u32(f, 2)));
            }
            continue;
        }
        if family.discs[i].rem_euclid(p as i128) != 0 {
            let pat = splitting_pattern(g, p)?;
            let mut f = 0u32;
            for &d in &pat.degrees {
                f = gcd_u32(f, d);
            }
            if f == 1 {
                return Ok(PrimeDecision::AlwaysNorm);
            }
            unram_f = Some(unram_f.map_or(f, |g0| gcd_u32(g0, f)));
        } else {
            general.push(i);
        }
    }
    if general.is_empty() {
        if quad_chars.is_empty() {
            return Ok(PrimeDecision::ValuationTest {
                f: unram_f.expect("at least one field"),
            });
        }
        // ramified quadratics present
        if unram_f.is_some() {
            // an unramified field contributes every unit; a ramified
            // quadratic character is nontrivial on units, so its kernel
            // contributes an element of valuation 1: together everything
            return Ok(PrimeDecision::AlwaysNorm);
        }
        for i in 0..quad_chars.len() {
            for j in i + 1..quad_chars.len() {
                if !is_padic_square(quad_chars[i] as i128 * quad_chars[j] as i128, p) {
                    // two distinct index-2 kernels generate everything
                    return Ok(PrimeDecision::AlwaysNorm);
                }
            }
        }
        return Ok(PrimeDecision::QuadChar { d: quad_chars[0] });
    }
    let mut groups = Vec::new();
    for &i in &general {
        let k0 = padic_val_i128(family.discs[i], p) + 1;
        if let Some(gr) = SampledGroup::build(&family.fields[i], p, k0) {
            groups.push(gr);
        }
    }
    // negative answers are exact only for a lone cyclic cubic (square
    // discriminant) whose sampled subgroup reaches the index 3 forced by
    // local class field theory at a ramified prime
    let certified = general.len() == 1
        && quad_chars.is_empty()
        && unram_f.is_none()
        && groups.len() == 1
        && family.fields[general[0]].len() == 4
        && is_perfect_square(family.discs[general[0]])
        && groups[0].index(p) == Some(3);
    Ok(PrimeDecision::Sampled {
        unram_f,
        quad_chars,
        groups,
        certified,
    })
}

fn padic_val_i128(mut n: i128, p: u64) -> u32 {
    debug_assert!(n != 0);
    let mut v = 0;
    while n % p as i128 == 0 {
        n /= p as i128;
        v += 1;
    }
    v
}

fn is_perfect_square(n: i128) -> bool {
    if n < 0 {
        return false;
    }
    let r = (n as f64).sqrt() as i128;
    [r - 1, r, r + 1].iter().any(|&s| s >= 0 && s * s == n)
}

/// One-shot local norm test; see [`MultinormTester`] for batched use.
pub fn multinorm_local_test(
    family: &MultinormFamily,
    value: &FactoredInteger,
    p: u64,
) -> Result<LocalNorm> {
    MultinormTester::new(family, 2)?.local_test(value, p)
}

/// Result of a projective fibre count over a multinorm family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultinormCount {
    /// Fibres certified everywhere locally soluble.
    pub certified: u64,
    /// Fibres with at least one undetermined place (and no certified
    /// failure): the true count lies in [certified, certified+undetermined].
    pub undetermined: u64,
    pub skipped_degenerate: u64,
}

/// Counts points (x₀ : x₁) of height ≤ B whose fibre value is a local norm
/// at the real place and at every p dividing the value or a discriminant.
pub fn count_multinorm(family: &MultinormFamily, b: i64) -> Result<MultinormCount> {
    if b < 1 {
        return Err(Error::domain("height bound must be ≥ 1"));
    }
    let mut tester = MultinormTester::new(family, b)?;
    let mut out = MultinormCount {
        certified: 0,
        undetermined: 0,
        skipped_degenerate: 0,
    };
    let mut err: Option<Error> = None;
    for_each_projective_pair(b, |x0, x1| {
        if err.is_some() {
            return;
        }
        match tester.fibre_status(x0, x1) {
            Ok(MultinormStatus::Degenerate) => out.skipped_degenerate += 1,
            Ok(MultinormStatus::Soluble) => out.certified += 1,
            Ok(MultinormStatus::Undetermined) => out.undetermined += 1,
            Ok(MultinormStatus::Insoluble) => {}
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}
