use crate::error::{Error, Result};

/// Hard ceiling on sieve allocations (entries), overridable per table.
pub const DEFAULT_SIEVE_BUDGET: u64 = 1 << 28;

/// All primes ≤ `limit`, increasing.
pub fn sieve_primes(limit: u64) -> Result<Vec<u64>> {
    sieve_primes_with_budget(limit, DEFAULT_SIEVE_BUDGET)
}

pub fn sieve_primes_with_budget(limit: u64, budget: u64) -> Result<Vec<u64>> {
    if limit < 2 {
        return Err(Error::domain("sieve_primes requires limit >= 2"));
    }
    if limit + 1 > budget {
        return Err(Error::Capacity {
            what: "sieve_primes",
            needed: (limit + 1) as u128,
            budget: budget as u128,
        });
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::with_capacity(if n > 16 {
        (n as f64 / (n as f64).ln() * 1.2) as usize
    } else {
        8
    });
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    Ok(primes)
}

/// Smallest-prime-factor table for n ≤ bound; shared read-only once built.
pub struct SpfTable {
    spf: Vec<u32>,
    bound: u64,
}

impl SpfTable {
    pub fn new(bound: u64) -> Result<SpfTable> {
        Self::with_budget(bound, DEFAULT_SIEVE_BUDGET)
    }

    pub fn with_budget(bound: u64, budget: u64) -> Result<SpfTable> {
        if bound < 2 {
            return Err(Error::domain("spf table bound must be >= 2"));
        }
        if bound >= u32::MAX as u64 || bound + 1 > budget {
            return Err(Error::Capacity {
                what: "spf_table",
                needed: (bound + 1) as u128,
                budget: budget as u128,
            });
        }
        let n = bound as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Ok(SpfTable { spf, bound })
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// Smallest prime factor of n, for 2 ≤ n ≤ bound.
    #[inline]
    pub fn spf(&self, n: u64) -> u64 {
        debug_assert!(n >= 2 && n <= self.bound);
        self.spf[n as usize] as u64
    }

    /// Appends the factorization of n (n ≤ bound) to `out` as (p, e) pairs,
    /// primes increasing. n = 1 appends nothing.
    #[inline]
    pub fn factor_into(&self, mut n: u64, out: &mut Vec<(u64, u32)>) {
        debug_assert!(n >= 1 && n <= self.bound);
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            let mut e = 0u32;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
}

#[inline]
fn mulmod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod_u64(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod_u64(r, a, m);
        }
        a = mulmod_u64(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for u64 (fixed witness set valid below 2^64).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Pollard–Brent rho; n must be odd composite with no tiny factors.
fn pollard_brent(n: u64) -> u64 {
    debug_assert!(n > 1 && !is_prime_u64(n) && n % 2 == 1);
    let mut c = 1u64;
    loop {
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        let f = |v: u64| (mulmod_u64(v, v, n) + c) % n;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = num_integer::gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Factors any u64 into (p, e) pairs, primes increasing: trial division by
/// small primes, then Miller–Rabin, with Pollard–Brent for stubborn
/// composites.
pub fn factor_u64(mut n: u64, out: &mut Vec<(u64, u32)>) {
    debug_assert!(n >= 1);
    for p in [2u64, 3, 5] {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    let mut d = 7u64;
    // 7, 11, 13, 17, ... wheel over residues coprime to 30
    let wheel = [4u64, 2, 4, 2, 4, 6, 2, 6];
    let mut wi = 0;
    while d * d <= n && d < (1 << 21) {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += wheel[wi];
        wi = (wi + 1) % wheel.len();
    }
    if n == 1 {
        return;
    }
    if is_prime_u64(n) {
        out.push((n, 1));
        return;
    }
    // Rare path: composite with no factor below 2^21. Split recursively.
    let mut stack = vec![n];
    let mut found: Vec<u64> = Vec::new();
    while let Some(m) = stack.pop() {
        if is_prime_u64(m) {
            found.push(m);
            continue;
        }
        let d = pollard_brent(m);
        stack.push(d);
        stack.push(m / d);
    }
    found.sort_unstable();
    let mut i = 0;
    while i < found.len() {
        let p = found[i];
        let mut e = 0u32;
        while i < found.len() && found[i] == p {
            e += 1;
            i += 1;
        }
        out.push((p, e));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent trial-division sieve used only as a cross-check oracle.
    fn trial_division_primes(limit: u64) -> Vec<u64> {
        let mut primes = Vec::new();
        'outer: for n in 2..=limit {
            let mut d = 2;
            while d * d <= n {
                if n % d == 0 {
                    continue 'outer;
                }
                d += 1;
            }
            primes.push(n);
        }
        primes
    }

    #[test]
    fn sieve_small() {
        assert_eq!(sieve_primes(10).unwrap(), vec![2, 3, 5, 7]);
        assert_eq!(sieve_primes(2).unwrap(), vec![2]);
        assert!(sieve_primes(1).is_err());
    }

    #[test]
    fn sieve_against_trial_division() {
        let limit = 10_000;
        assert_eq!(sieve_primes(limit).unwrap(), trial_division_primes(limit));
    }

    #[test]
    fn sieve_millionth_count() {
        assert_eq!(sieve_primes(1_000_000).unwrap().len(), 78_498);
    }

    #[test]
    fn sieve_budget() {
        assert!(matches!(
            sieve_primes_with_budget(1000, 100),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn spf_table_factors() {
        let t = SpfTable::new(1000).unwrap();
        let mut f = Vec::new();
        t.factor_into(12, &mut f);
        assert_eq!(f, vec![(2, 2), (3, 1)]);
        f.clear();
        t.factor_into(1, &mut f);
        assert!(f.is_empty());
        for n in 2..=1000u64 {
            f.clear();
            t.factor_into(n, &mut f);
            let back: u64 = f.iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(back, n);
            for &(p, _) in &f {
                assert!(is_prime_u64(p));
            }
        }
    }

    #[test]
    fn miller_rabin_matches_trial_division() {
        for n in 0..5000u64 {
            let naive = n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(is_prime_u64(n), naive, "n={n}");
        }
        assert!(is_prime_u64(2_147_483_647)); // 2^31 - 1
        assert!(!is_prime_u64(2_147_483_649));
    }

    #[test]
    fn factor_u64_multiplies_back() {
        let cases = [600_851_475_143u64, 1, 2, 97, 2u64.pow(40), 999_999_999_989];
        for &n in &cases {
            let mut f = Vec::new();
            factor_u64(n, &mut f);
            let back: u64 = f.iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(back, n);
            for &(p, _) in &f {
                assert!(is_prime_u64(p));
            }
        }
        let mut f = Vec::new();
        factor_u64(600_851_475_143, &mut f);
        assert_eq!(f, vec![(71, 1), (839, 1), (1471, 1), (6857, 1)]);
    }
}
