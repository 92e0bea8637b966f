use num_rational::Ratio;

use super::{gcd_i64, square_class, DeltaExponent, DivisorDelta};
use crate::arith::{factor_u64, hilbert_symbol, Place};
use crate::error::{Error, Result};

/// A finite set 𝔅 of quaternion classes (a_i, f_i) on the complement U of
/// a hyperplane arrangement in ℙⁿ, where f_i = ∏_k D_k(x)^{m_{ik}} is a
/// degree-0 monomial in the hyperplane forms.
#[derive(Debug, Clone)]
pub struct QuaternionBrauerFamily {
    /// Primitive linear forms on ℙⁿ, coefficient vectors of length n+1.
    hyperplanes: Vec<Vec<i64>>,
    /// (a_i, exponent vector m_i over the hyperplanes), Σ_k m_{ik} = 0.
    classes: Vec<(i64, Vec<i64>)>,
    dim: usize,
}

impl QuaternionBrauerFamily {
    pub fn new(
        hyperplanes: Vec<Vec<i64>>,
        classes: Vec<(i64, Vec<i64>)>,
    ) -> Result<QuaternionBrauerFamily> {
        if hyperplanes.is_empty() {
            return Err(Error::domain("need at least one hyperplane"));
        }
        let len = hyperplanes[0].len();
        if len < 2 {
            return Err(Error::domain("hyperplanes live on ℙⁿ with n ≥ 1"));
        }
        for h in &hyperplanes {
            if h.len() != len {
                return Err(Error::domain("hyperplanes must share an ambient space"));
            }
            let g = h.iter().fold(0i64, |g, &c| gcd_i64(g, c));
            if g != 1 {
                return Err(Error::domain("hyperplanes must be primitive and nonzero"));
            }
        }
        for (i, h) in hyperplanes.iter().enumerate() {
            for h2 in &hyperplanes[i + 1..] {
                if parallel(h, h2) {
                    return Err(Error::domain("hyperplanes must be pairwise distinct"));
                }
            }
        }
        if classes.is_empty() {
            return Err(Error::domain("need at least one class"));
        }
        for (a, m) in &classes {
            if *a == 0 {
                return Err(Error::domain("class coefficients must be nonzero"));
            }
            if m.len() != hyperplanes.len() {
                return Err(Error::domain("need one exponent per hyperplane"));
            }
            if m.iter().sum::<i64>() != 0 {
                return Err(Error::domain("monomials must have total degree zero"));
            }
        }
        Ok(QuaternionBrauerFamily {
            dim: len - 1,
            hyperplanes,
            classes,
        })
    }

    pub fn hyperplanes(&self) -> &[Vec<i64>] {
        &self.hyperplanes
    }

    pub fn classes(&self) -> &[(i64, Vec<i64>)] {
        &self.classes
    }

    /// n, for the ambient ℙⁿ.
    pub fn dimension(&self) -> usize {
        self.dim
    }
}

fn parallel(a: &[i64], b: &[i64]) -> bool {
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            if a[i] as i128 * b[j] as i128 != a[j] as i128 * b[i] as i128 {
                return false;
            }
        }
    }
    true
}

/// 𝔽₂-rank of a set of square classes in ℚ^×/ℚ^×², coordinates indexed by
/// {−1} ∪ primes.
fn square_class_rank(values: &[i64]) -> u32 {
    let mut primes: Vec<u64> = Vec::new();
    let mut vectors: Vec<(bool, Vec<u64>)> = Vec::new();
    for &v in values {
        let (neg, ps) = square_class(v);
        primes.extend_from_slice(&ps);
        vectors.push((neg, ps));
    }
    primes.sort_unstable();
    primes.dedup();
    let mut rows: Vec<u128> = Vec::new();
    for (neg, ps) in vectors {
        let mut bits: u128 = if neg { 1 } else { 0 };
        for p in ps {
            let idx = primes.binary_search(&p).unwrap();
            bits |= 1u128 << (idx + 1);
        }
        rows.push(bits);
    }
    // Gaussian elimination over 𝔽₂
    let mut rank = 0u32;
    for col in 0..(primes.len() + 1) {
        let mask = 1u128 << col;
        if let Some(pos) = (rank as usize..rows.len()).find(|&i| rows[i] & mask != 0) {
            rows.swap(rank as usize, pos);
            let pivot = rows[rank as usize];
            for (i, r) in rows.iter_mut().enumerate() {
                if i != rank as usize && *r & mask != 0 {
                    *r ^= pivot;
                }
            }
            rank += 1;
        }
    }
    rank
}

/// Δ(𝔅) = Σ_D (1 − 1/|⟨∂_D 𝔅⟩|): the residue of (a_i, f_i) along the
/// hyperplane D_k is the square class of a_i^{m_{ik}}, so |⟨∂_D 𝔅⟩| is
/// 2^rank of the square classes of the a_i with odd exponent at D_k;
/// divisors off the arrangement have vanishing residues and contribute 0.
pub fn brauer_delta(family: &QuaternionBrauerFamily) -> DeltaExponent {
    let mut divisors = Vec::new();
    for (k, h) in family.hyperplanes.iter().enumerate() {
        let residues: Vec<i64> = family
            .classes
            .iter()
            .filter(|(_, m)| m[k].rem_euclid(2) == 1)
            .map(|&(a, _)| a)
            .collect();
        let order = 1i64 << square_class_rank(&residues);
        let delta = Ratio::new(1, order);
        divisors.push(DivisorDelta {
            label: format!("hyperplane_{k}: {h:?}"),
            delta,
            contribution: Ratio::new(1, 1) - delta,
        });
    }
    DeltaExponent::from_divisors(divisors, true)
}

/// Does the quaternion class (a, w) vanish in Br ℚ? Checked at the real
/// place and at every p | 2aw; everywhere else the symbol is trivially +1.
fn quaternion_class_vanishes(a: i64, w: i128) -> Result<bool> {
    debug_assert!(a != 0 && w != 0);
    if a < 0 && w < 0 {
        return Ok(false);
    }
    let prod = (2 * a as i128).checked_mul(w).ok_or(Error::Capacity {
        what: "quaternion class evaluation",
        needed: u128::MAX,
        budget: i128::MAX as u128,
    })?;
    let mut fac = Vec::new();
    factor_u64(prod.unsigned_abs() as u64, &mut fac);
    for (p, _) in fac {
        if hilbert_symbol(a as i128, w, Place::Prime(p))? != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Counts points of U(ℚ) of height ≤ B where every class of 𝔅 evaluates
/// to 0 in Br ℚ: b_i(x) = (a_i, ∏ D_k(x)^{m_{ik} mod 2}) vanishes at every
/// place. Capacity-limited to n ≤ 2.
pub fn brauer_zero_locus_count(family: &QuaternionBrauerFamily, b: i64) -> Result<u64> {
    if b < 1 {
        return Err(Error::domain("height bound must be ≥ 1"));
    }
    if family.dim > 2 {
        return Err(Error::Capacity {
            what: "projective point enumeration",
            needed: family.dim as u128,
            budget: 2,
        });
    }
    let mut count = 0u64;
    let mut err: Option<Error> = None;
    for_each_primitive_point(family.dim + 1, b, |x| {
        if err.is_some() {
            return;
        }
        let values: Vec<i128> = family
            .hyperplanes
            .iter()
            .map(|h| {
                h.iter()
                    .zip(x)
                    .map(|(&c, &xi)| c as i128 * xi as i128)
                    .sum()
            })
            .collect();
        if values.iter().any(|&v| v == 0) {
            return; // off U
        }
        for (a, m) in &family.classes {
            let mut w: i128 = 1;
            for (k, &mk) in m.iter().enumerate() {
                if mk.rem_euclid(2) == 1 {
                    w = match w.checked_mul(values[k]) {
                        Some(v) => v,
                        None => {
                            err = Some(Error::Capacity {
                                what: "brauer monomial value",
                                needed: u128::MAX,
                                budget: i128::MAX as u128,
                            });
                            return;
                        }
                    };
                }
            }
            match quaternion_class_vanishes(*a, w) {
                Ok(true) => {}
                Ok(false) => return,
                Err(e) => {
                    err = Some(e);
                    return;
                }
            }
        }
        count += 1;
    });
    match err {
        Some(e) => Err(e),
        None => Ok(count),
    }
}

/// Visits one representative of every point of ℙ^{dim−1}(ℚ) of height ≤ B:
/// primitive integer vectors with first nonzero coordinate positive.
fn for_each_primitive_point(coords: usize, b: i64, mut visit: impl FnMut(&[i64])) {
    let mut x = vec![0i64; coords];
    fn rec(x: &mut Vec<i64>, i: usize, b: i64, leading_zero: bool, visit: &mut impl FnMut(&[i64])) {
        if i == x.len() {
            if !leading_zero {
                let g = x.iter().fold(0i64, |g, &c| gcd_i64(g, c));
                if g == 1 {
                    visit(x);
                }
            }
            return;
        }
        let lo = if leading_zero { 0 } else { -b };
        for v in lo..=b {
            x[i] = v;
            rec(x, i + 1, b, leading_zero && v == 0, visit);
        }
    }
    rec(&mut x, 0, b, true, &mut visit);
}
