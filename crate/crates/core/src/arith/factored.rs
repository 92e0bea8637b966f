use serde::{Deserialize, Serialize};

use super::primes::{factor_u64, SpfTable};
use crate::error::{Error, Result};

/// A signed integer carried together with its prime factorization.
///
/// Invariant: `sign · ∏ p^e = value`, primes strictly increasing, exponents
/// ≥ 1; zero has sign 0 and no factors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactoredInteger {
    pub value: i128,
    pub sign: i8,
    pub factors: Vec<(u64, u32)>,
}

impl FactoredInteger {
    pub fn zero() -> FactoredInteger {
        FactoredInteger {
            value: 0,
            sign: 0,
            factors: Vec::new(),
        }
    }

    pub fn one() -> FactoredInteger {
        FactoredInteger {
            value: 1,
            sign: 1,
            factors: Vec::new(),
        }
    }

    pub fn abs_u64(&self) -> u64 {
        self.value.unsigned_abs() as u64
    }

    /// v_p of the value; zero input is the caller's error.
    pub fn valuation(&self, p: u64) -> u32 {
        debug_assert!(self.sign != 0);
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    pub fn is_unit_at(&self, p: u64) -> bool {
        self.valuation(p) == 0
    }
}

/// Factors n using the shared spf table, falling back to trial division
/// plus Miller–Rabin (and Pollard rho) beyond the table bound.
pub fn spf_factor(n: i128, table: &SpfTable) -> Result<FactoredInteger> {
    if n == 0 {
        return Ok(FactoredInteger::zero());
    }
    let mag = n.unsigned_abs();
    if mag > u64::MAX as u128 {
        return Err(Error::Capacity {
            what: "spf_factor",
            needed: mag,
            budget: u64::MAX as u128,
        });
    }
    let mag = mag as u64;
    let mut factors = Vec::new();
    if mag <= table.bound() {
        table.factor_into(mag, &mut factors);
    } else {
        factor_u64(mag, &mut factors);
    }
    Ok(FactoredInteger {
        value: n,
        sign: if n > 0 { 1 } else { -1 },
        factors,
    })
}

/// Largest k with p^k | n, for n ≠ 0.
pub fn padic_valuation(n: i128, p: u64) -> Result<u32> {
    if n == 0 {
        return Err(Error::domain("padic_valuation undefined at 0"));
    }
    debug_assert!(p >= 2);
    let p = p as i128;
    let mut n = n;
    let mut v = 0u32;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_small() {
        let t = SpfTable::new(100).unwrap();
        let f = spf_factor(12, &t).unwrap();
        assert_eq!(f.sign, 1);
        assert_eq!(f.factors, vec![(2, 2), (3, 1)]);
        let f = spf_factor(-1, &t).unwrap();
        assert_eq!((f.sign, f.factors.len()), (-1, 0));
        let f = spf_factor(0, &t).unwrap();
        assert_eq!(f.sign, 0);
    }

    #[test]
    fn factor_beyond_table_bound() {
        let t = SpfTable::new(100).unwrap();
        let f = spf_factor(600_851_475_143, &t).unwrap();
        assert_eq!(f.factors, vec![(71, 1), (839, 1), (1471, 1), (6857, 1)]);
        let back: i128 = f
            .factors
            .iter()
            .map(|&(p, e)| (p as i128).pow(e))
            .product::<i128>()
            * f.sign as i128;
        assert_eq!(back, f.value);
    }

    #[test]
    fn valuations() {
        assert_eq!(padic_valuation(12, 2).unwrap(), 2);
        assert_eq!(padic_valuation(12, 5).unwrap(), 0);
        assert_eq!(padic_valuation(3i128.pow(20), 3).unwrap(), 20);
        assert!(padic_valuation(0, 2).is_err());
    }
}
