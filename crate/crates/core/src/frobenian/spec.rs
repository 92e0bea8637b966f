use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::character::{primitive_characters_up_to, DirichletCharacter};
use crate::arith::{sieve_primes, splitting_pattern, SplittingPattern};
use crate::error::{Error, Result};
use crate::value::Scalar;

/// Default sample bound for empirical means (primes in (X/2, X]).
pub const DEFAULT_EMPIRICAL_BOUND: u64 = 1 << 20;

/// A function on primes, constant on Frobenius classes away from a finite
/// exceptional set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum FrobKind {
    /// ρ(p) = Σ_i c_i χ_i(p), a finite combination of Dirichlet characters.
    CharacterCombo(Vec<(DirichletCharacter, Scalar)>),
    /// ρ(p) = value(splitting pattern of `poly` mod p), optionally twisted
    /// by a Dirichlet character. `distribution`, when present, gives the
    /// exact natural density of each pattern, enabling exact means.
    SplitPattern {
        poly: Vec<i64>,
        class_values: Vec<(SplittingPattern, Scalar)>,
        distribution: Option<Vec<(SplittingPattern, Scalar)>>,
        twist: Option<DirichletCharacter>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrobenianSpec {
    kind: FrobKind,
    /// Sorted finite set S of exceptional primes.
    exceptional_set: Vec<u64>,
    /// Value of ρ at each prime of S.
    exceptional_values: BTreeMap<u64, Scalar>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Exactness {
    Exact,
    Empirical { sample_bound: u64, std_error: f64 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MeanValue {
    pub value: Scalar,
    pub exactness: Exactness,
}

/// Discriminant of a monic integer polynomial (ascending coefficients),
/// via a fraction-free determinant of the Sylvester matrix of (f, f').
pub fn poly_discriminant(f: &[i64]) -> Result<i128> {
    let n = f.len().saturating_sub(1);
    if n == 0 || *f.last().unwrap() != 1 {
        return Err(Error::domain("need a monic polynomial of degree ≥ 1"));
    }
    if n == 1 {
        return Ok(1);
    }
    let fp: Vec<i64> = (1..=n).map(|i| f[i] * i as i64).collect(); // degree n-1
    let dim = 2 * n - 1;
    let mut m = vec![vec![0i128; dim]; dim];
    // n-1 shifted rows of f, then n shifted rows of f'
    for r in 0..n - 1 {
        for (j, &c) in f.iter().enumerate() {
            m[r][r + n - j] = c as i128; // descending order layout
        }
    }
    for r in 0..n {
        for (j, &c) in fp.iter().enumerate() {
            m[n - 1 + r][r + n - 1 - j] = c as i128;
        }
    }
    let res = bareiss_det(&mut m)?;
    let sign = if (n * (n - 1) / 2) % 2 == 0 { 1 } else { -1 };
    Ok(sign * res)
}

fn bareiss_det(m: &mut [Vec<i128>]) -> Result<i128> {
    let n = m.len();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            let Some(r) = (k + 1..n).find(|&r| m[r][k] != 0) else {
                return Ok(0);
            };
            m.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = m[i][j]
                    .checked_mul(m[k][k])
                    .and_then(|a| m[i][k].checked_mul(m[k][j]).map(|b| a - b))
                    .ok_or_else(|| Error::domain("discriminant overflow"))?;
                m[i][j] = num / prev;
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    Ok(sign * m[n - 1][n - 1])
}

/// All partitions of n, as sorted-ascending multisets.
fn partitions(n: u32) -> Vec<Vec<u32>> {
    fn rec(n: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            let mut p = cur.clone();
            p.sort_unstable();
            out.push(p);
            return;
        }
        for k in (1..=max.min(n)).rev() {
            cur.push(k);
            rec(n - k, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

impl FrobenianSpec {
    /// ρ(p) = Σ c_i χ_i(p). S must contain every prime dividing a character
    /// modulus, with an explicit value of ρ there.
    pub fn character_combo(
        terms: Vec<(DirichletCharacter, Scalar)>,
        exceptional: Vec<(u64, Scalar)>,
    ) -> Result<FrobenianSpec> {
        let spec = FrobenianSpec {
            kind: FrobKind::CharacterCombo(terms),
            exceptional_set: Vec::new(),
            exceptional_values: BTreeMap::new(),
        }
        .with_exceptional(exceptional)?;
        for p in spec.ramified_primes()? {
            if !spec.exceptional_set.contains(&p) {
                return Err(Error::domain(format!(
                    "prime {p} divides a character modulus but has no exceptional value"
                )));
            }
        }
        Ok(spec)
    }

    /// ρ(p) = class value of the splitting pattern of `poly` mod p. The
    /// table must cover every partition of deg(poly); S must contain every
    /// prime dividing the discriminant.
    pub fn split_pattern(
        poly: Vec<i64>,
        class_values: Vec<(SplittingPattern, Scalar)>,
        distribution: Option<Vec<(SplittingPattern, Scalar)>>,
        exceptional: Vec<(u64, Scalar)>,
    ) -> Result<FrobenianSpec> {
        let n = poly.len().saturating_sub(1) as u32;
        if n == 0 {
            return Err(Error::domain("constant polynomial"));
        }
        for part in partitions(n) {
            let pat = SplittingPattern::of(part.clone());
            if !class_values.iter().any(|(q, _)| *q == pat) {
                return Err(Error::domain(format!(
                    "class value table misses splitting pattern {part:?}"
                )));
            }
        }
        if let Some(dist) = &distribution {
            let total = dist
                .iter()
                .fold(Scalar::ZERO, |acc, (_, w)| acc.add(w))
                .to_c64();
            if (total.re - 1.0).abs() > 1e-12 || total.im.abs() > 1e-12 {
                return Err(Error::domain("pattern distribution must sum to 1"));
            }
        }
        let spec = FrobenianSpec {
            kind: FrobKind::SplitPattern {
                poly,
                class_values,
                distribution,
                twist: None,
            },
            exceptional_set: Vec::new(),
            exceptional_values: BTreeMap::new(),
        }
        .with_exceptional(exceptional)?;
        for p in spec.ramified_primes()? {
            if !spec.exceptional_set.contains(&p) {
                return Err(Error::domain(format!(
                    "prime {p} divides the discriminant but has no exceptional value"
                )));
            }
        }
        Ok(spec)
    }

    fn with_exceptional(mut self, exceptional: Vec<(u64, Scalar)>) -> Result<FrobenianSpec> {
        for (p, v) in exceptional {
            if !crate::arith::is_prime_u64(p) {
                return Err(Error::domain(format!("exceptional entry {p} is not prime")));
            }
            self.exceptional_values.insert(p, v);
        }
        self.exceptional_set = self.exceptional_values.keys().copied().collect();
        Ok(self)
    }

    /// Primes where the defining data itself degenerates: divisors of
    /// character moduli, or of the polynomial discriminant and twist modulus.
    fn ramified_primes(&self) -> Result<Vec<u64>> {
        let mut moduli: Vec<u64> = Vec::new();
        match &self.kind {
            FrobKind::CharacterCombo(terms) => {
                moduli.extend(terms.iter().map(|(c, _)| c.modulus()));
            }
            FrobKind::SplitPattern { poly, twist, .. } => {
                let d = poly_discriminant(poly)?;
                if d == 0 {
                    return Err(Error::domain("polynomial has a repeated root"));
                }
                let d = u64::try_from(d.unsigned_abs()).map_err(|_| Error::Capacity {
                    what: "polynomial discriminant",
                    needed: d.unsigned_abs(),
                    budget: u64::MAX as u128,
                })?;
                moduli.push(d);
                if let Some(chi) = twist {
                    moduli.push(chi.modulus());
                }
            }
        }
        let mut primes = Vec::new();
        let mut fac = Vec::new();
        for m in moduli {
            if m > 1 {
                fac.clear();
                crate::arith::factor_u64(m, &mut fac);
                primes.extend(fac.iter().map(|&(p, _)| p));
            }
        }
        primes.sort_unstable();
        primes.dedup();
        Ok(primes)
    }

    pub fn exceptional_set(&self) -> &[u64] {
        &self.exceptional_set
    }

    pub fn kind(&self) -> &FrobKind {
        &self.kind
    }

    pub fn is_exceptional(&self, p: u64) -> bool {
        self.exceptional_values.contains_key(&p)
    }

    /// ρ(p). Total on primes: exceptional primes use the stored value.
    pub fn eval_prime(&self, p: u64) -> Scalar {
        if let Some(v) = self.exceptional_values.get(&p) {
            return *v;
        }
        match &self.kind {
            FrobKind::CharacterCombo(terms) => terms.iter().fold(Scalar::ZERO, |acc, (chi, c)| {
                acc.add(&c.mul(&chi.eval(p as i128)))
            }),
            FrobKind::SplitPattern {
                poly,
                class_values,
                twist,
                ..
            } => {
                let pat = splitting_pattern(poly, p)
                    .expect("pattern defined off the exceptional set");
                debug_assert!(!pat.ramified, "ramified prime escaped the exceptional set");
                let v = class_values
                    .iter()
                    .find(|(q, _)| *q == pat)
                    .map(|(_, v)| *v)
                    .expect("class value table is total");
                match twist {
                    None => v,
                    Some(chi) => v.mul(&chi.eval(p as i128)),
                }
            }
        }
    }

    /// The mean m(ρ) over primes, exact when the defining data permits,
    /// otherwise an empirical dyadic-window average with its standard error.
    pub fn mean(&self) -> Result<MeanValue> {
        self.mean_with_bound(DEFAULT_EMPIRICAL_BOUND)
    }

    pub fn mean_with_bound(&self, sample_bound: u64) -> Result<MeanValue> {
        match &self.kind {
            FrobKind::CharacterCombo(terms) => {
                // only principal characters contribute to the mean
                let m = terms
                    .iter()
                    .filter(|(chi, _)| chi.is_principal())
                    .fold(Scalar::ZERO, |acc, (_, c)| acc.add(c));
                Ok(MeanValue {
                    value: m,
                    exactness: Exactness::Exact,
                })
            }
            FrobKind::SplitPattern {
                class_values,
                distribution,
                twist,
                ..
            } => {
                let twist_principal = twist.as_ref().map_or(true, |c| c.is_principal());
                if let (Some(dist), true) = (distribution, twist_principal) {
                    let mut m = Scalar::ZERO;
                    for (pat, w) in dist {
                        let v = class_values
                            .iter()
                            .find(|(q, _)| q == pat)
                            .map(|(_, v)| *v)
                            .ok_or_else(|| {
                                Error::domain("distribution pattern missing from class table")
                            })?;
                        m = m.add(&w.mul(&v));
                    }
                    Ok(MeanValue {
                        value: m,
                        exactness: Exactness::Exact,
                    })
                } else {
                    self.empirical_mean(sample_bound)
                }
            }
        }
    }

    fn empirical_mean(&self, sample_bound: u64) -> Result<MeanValue> {
        let primes = sieve_primes(sample_bound)?;
        let lo = sample_bound / 2;
        let mut n = 0u64;
        let (mut sre, mut sim) = (0.0f64, 0.0f64);
        let mut sq = 0.0f64;
        for &p in primes.iter().filter(|&&p| p > lo) {
            if self.is_exceptional(p) {
                continue;
            }
            let z = self.eval_prime(p).to_c64();
            sre += z.re;
            sim += z.im;
            sq += z.norm_sqr();
            n += 1;
        }
        if n == 0 {
            return Err(Error::domain("empirical mean window contains no primes"));
        }
        let (mre, mim) = (sre / n as f64, sim / n as f64);
        let var = (sq / n as f64 - mre * mre - mim * mim).max(0.0);
        Ok(MeanValue {
            value: Scalar::Approx { re: mre, im: mim },
            exactness: Exactness::Empirical {
                sample_bound,
                std_error: (var / n as f64).sqrt(),
            },
        })
    }

    /// A copy with every exceptional value replaced by `v` (e.g. the
    /// convention that indicator functions are 1 on their bad primes).
    pub fn with_exceptional_values_set_to(&self, v: Scalar) -> FrobenianSpec {
        let mut out = self.clone();
        for val in out.exceptional_values.values_mut() {
            *val = v;
        }
        out
    }

    /// The pointwise product p ↦ ρ(p)·χ(p). Primes dividing the twist
    /// modulus join the exceptional set with value ρ(p)·χ(p) = 0.
    pub fn twist(&self, chi: &DirichletCharacter) -> FrobenianSpec {
        let mut exceptional_values = self.exceptional_values.clone();
        for (p, v) in exceptional_values.iter_mut() {
            *v = v.mul(&chi.eval(*p as i128));
        }
        let mut fac = Vec::new();
        if chi.modulus() > 1 {
            crate::arith::factor_u64(chi.modulus(), &mut fac);
        }
        for &(p, _) in &fac {
            exceptional_values.entry(p).or_insert(Scalar::ZERO);
        }
        let kind = match &self.kind {
            FrobKind::CharacterCombo(terms) => FrobKind::CharacterCombo(
                terms
                    .iter()
                    .map(|(c, w)| (c.multiply(chi), *w))
                    .collect(),
            ),
            FrobKind::SplitPattern {
                poly,
                class_values,
                distribution,
                twist,
            } => FrobKind::SplitPattern {
                poly: poly.clone(),
                class_values: class_values.clone(),
                distribution: distribution.clone(),
                twist: Some(match twist {
                    None => chi.clone(),
                    Some(t) => t.multiply(chi),
                }),
            },
        };
        let exceptional_set = exceptional_values.keys().copied().collect();
        FrobenianSpec {
            kind,
            exceptional_set,
            exceptional_values,
        }
    }

    /// All primitive characters χ of conductor ≤ `conductor_bound` with
    /// χ(p) = 1 at every prime in the support of ρ, verified at the first
    /// `verify_count` primes outside S. Requires ρ real and nonnegative
    /// there. The trivial character is always included.
    pub fn exceptional_characters(
        &self,
        conductor_bound: u64,
        verify_count: usize,
    ) -> Result<Vec<DirichletCharacter>> {
        // upper bound on the n-th prime for n ≥ 6: n(ln n + ln ln n)
        let n = verify_count.max(6) as f64;
        let hi = (n * (n.ln() + n.ln().ln()) * 1.2) as u64 + 100;
        let primes = sieve_primes(hi)?;
        let mut support = Vec::new();
        let mut taken = 0usize;
        for &p in &primes {
            if taken == verify_count {
                break;
            }
            if self.is_exceptional(p) {
                continue;
            }
            taken += 1;
            let v = self.eval_prime(p).to_c64();
            if v.im.abs() > 1e-12 || v.re < -1e-12 {
                return Err(Error::domain(
                    "exceptional characters need a real nonnegative function",
                ));
            }
            if v.re > 1e-12 {
                support.push(p);
            }
        }
        if taken < verify_count {
            return Err(Error::Capacity {
                what: "verification primes",
                needed: verify_count as u128,
                budget: taken as u128,
            });
        }
        let mut out = Vec::new();
        'chars: for chi in primitive_characters_up_to(conductor_bound) {
            for &p in &support {
                if chi.modulus() % p != 0 && !chi.is_one_at(p as i128) {
                    continue 'chars;
                }
            }
            out.push(chi);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn split_indicator_x2_minus_2() -> FrobenianSpec {
        // ρ(p) = 1 iff x² − 2 splits mod p; exact distribution (1/2, 1/2)
        FrobenianSpec::split_pattern(
            vec![-2, 0, 1],
            vec![
                (SplittingPattern::of(vec![1, 1]), Scalar::ONE),
                (SplittingPattern::of(vec![2]), Scalar::ZERO),
            ],
            Some(vec![
                (SplittingPattern::of(vec![1, 1]), Scalar::from_ratio(1, 2)),
                (SplittingPattern::of(vec![2]), Scalar::from_ratio(1, 2)),
            ]),
            vec![(2, Scalar::ONE)],
        )
        .unwrap()
    }

    #[test]
    fn discriminants() {
        assert_eq!(poly_discriminant(&[-2, 0, 1]).unwrap(), 8); // x²-2
        assert_eq!(poly_discriminant(&[1, 0, 1]).unwrap(), -4); // x²+1
        assert_eq!(poly_discriminant(&[-2, 0, 0, 1]).unwrap(), -108); // x³-2
        assert_eq!(poly_discriminant(&[-1, -3, 0, 1]).unwrap(), 81); // x³-3x-1
        // b²-4c for generic monic quadratics
        for b in -5i64..=5 {
            for c in -5i64..=5 {
                assert_eq!(poly_discriminant(&[c, b, 1]).unwrap(), (b * b - 4 * c) as i128);
            }
        }
    }

    #[test]
    fn split_indicator_values_and_mean() {
        let rho = split_indicator_x2_minus_2();
        // 2 is a QR mod p iff p ≡ ±1 mod 8
        for p in [7u64, 17, 23, 31, 41, 47, 71, 73] {
            assert_eq!(rho.eval_prime(p), Scalar::ONE, "p={p}");
        }
        for p in [3u64, 5, 11, 13, 19, 29, 37, 43] {
            assert_eq!(rho.eval_prime(p), Scalar::ZERO, "p={p}");
        }
        assert_eq!(rho.eval_prime(2), Scalar::ONE);
        let m = rho.mean().unwrap();
        assert_eq!(m.exactness, Exactness::Exact);
        assert_eq!(m.value.exact_real().unwrap(), Ratio::new(1, 2));
    }

    #[test]
    fn character_combo_mean_and_eval() {
        // ρ = (1 + χ_{-4})/2, the indicator of p ≡ 1 mod 4
        let chi = DirichletCharacter::from_discriminant(-4).unwrap();
        let rho = FrobenianSpec::character_combo(
            vec![
                (DirichletCharacter::trivial(), Scalar::from_ratio(1, 2)),
                (chi, Scalar::from_ratio(1, 2)),
            ],
            vec![(2, Scalar::ZERO)],
        )
        .unwrap();
        assert_eq!(rho.eval_prime(5), Scalar::ONE);
        assert_eq!(rho.eval_prime(13), Scalar::ONE);
        assert_eq!(rho.eval_prime(7), Scalar::ZERO);
        assert_eq!(rho.eval_prime(2), Scalar::ZERO);
        let m = rho.mean().unwrap();
        assert_eq!(m.exactness, Exactness::Exact);
        assert_eq!(m.value.exact_real().unwrap(), Ratio::new(1, 2));
    }

    #[test]
    fn missing_exceptional_value_is_rejected() {
        // x² − 2 ramifies at 2, so S must contain 2
        let r = FrobenianSpec::split_pattern(
            vec![-2, 0, 1],
            vec![
                (SplittingPattern::of(vec![1, 1]), Scalar::ONE),
                (SplittingPattern::of(vec![2]), Scalar::ZERO),
            ],
            None,
            vec![],
        );
        assert!(r.is_err());
    }

    #[test]
    fn empirical_mean_matches_exact() {
        let rho = split_indicator_x2_minus_2();
        let emp = rho.empirical_mean(1 << 18).unwrap();
        let z = emp.value.to_c64();
        assert!((z.re - 0.5).abs() < 0.01, "empirical mean {}", z.re);
        match emp.exactness {
            Exactness::Empirical { std_error, .. } => assert!(std_error < 0.01),
            _ => panic!("expected empirical"),
        }
    }

    #[test]
    fn twist_by_trivial_preserves_mean() {
        let rho = split_indicator_x2_minus_2();
        let t = rho.twist(&DirichletCharacter::trivial());
        for p in [3u64, 5, 7, 11, 13, 17] {
            assert_eq!(t.eval_prime(p).to_c64(), rho.eval_prime(p).to_c64());
        }
        let m = t.mean().unwrap();
        assert_eq!(m.value.exact_real().unwrap(), Ratio::new(1, 2));
    }

    #[test]
    fn twisted_mean_is_dominated() {
        // |m(ρχ)| ≤ m(ρ) over all primitive χ of conductor ≤ 24
        let rho = split_indicator_x2_minus_2();
        let m0 = rho.mean().unwrap().value.to_c64().re;
        for chi in primitive_characters_up_to(24) {
            let twisted = rho.twist(&chi);
            let m = twisted.mean_with_bound(1 << 18).unwrap().value.to_c64();
            assert!(
                m.norm() <= m0 + 0.02,
                "conductor {} gives |mean| {}",
                chi.conductor(),
                m.norm()
            );
        }
    }

    #[test]
    fn exceptional_characters_for_quarter_indicator() {
        // indicator of p ≡ 1 mod 4: exactly the trivial character and χ_{-4}
        let chi = DirichletCharacter::from_discriminant(-4).unwrap();
        let rho = FrobenianSpec::character_combo(
            vec![
                (DirichletCharacter::trivial(), Scalar::from_ratio(1, 2)),
                (chi.clone(), Scalar::from_ratio(1, 2)),
            ],
            vec![(2, Scalar::ZERO)],
        )
        .unwrap();
        let found = rho.exceptional_characters(10, 2_000).unwrap();
        assert_eq!(found.len(), 2);
        assert!(found.iter().any(|c| c.is_principal()));
        assert!(found.iter().any(|c| c.same_values(&chi)));
    }

    #[test]
    fn json_round_trip() {
        let rho = split_indicator_x2_minus_2();
        let s = serde_json::to_string(&rho).unwrap();
        let back: FrobenianSpec = serde_json::from_str(&s).unwrap();
        for p in [2u64, 3, 5, 7, 17, 23, 101] {
            assert_eq!(back.eval_prime(p).to_c64(), rho.eval_prime(p).to_c64());
        }
        assert_eq!(back.exceptional_set(), rho.exceptional_set());
    }
}
