use serde::{Deserialize, Serialize};

use super::symbols::{jacobi_symbol, kronecker_symbol};
use crate::error::{Error, Result};

/// How a rational prime behaves in ℚ(√d), d squarefree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitKind {
    /// r is a square root of d mod p; the two degree-1 primes above p are
    /// (p, √d − r) and (p, √d + r).
    Split { root: u64 },
    Inert,
    Ramified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticPrimeSplit {
    pub d: i64,
    pub p: u64,
    pub kind: SplitKind,
}

#[inline]
fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

/// Square root of a quadratic residue n mod odd prime p (Tonelli–Shanks).
pub fn sqrt_mod_p(n: u64, p: u64) -> Option<u64> {
    let n = n % p;
    if n == 0 {
        return Some(0);
    }
    if jacobi_symbol(n as i128, p as u128).ok()? != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(powmod(n, (p + 1) / 4, p));
    }
    // p ≡ 1 mod 4: full Tonelli–Shanks
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let z = (2..p)
        .find(|&z| jacobi_symbol(z as i128, p as u128).unwrap() == -1)
        .expect("a non-residue exists for p > 2");
    let mut m = s;
    let mut c = powmod(z, q, p);
    let mut t = powmod(n, q, p);
    let mut r = powmod(n, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0u32;
        let mut tt = t;
        while tt != 1 {
            tt = mulmod(tt, tt, p);
            i += 1;
            if i == m {
                return None; // unreachable for residues
            }
        }
        let b = powmod(c, 1u64 << (m - i - 1), p);
        m = i;
        c = mulmod(b, b, p);
        t = mulmod(t, c, p);
        r = mulmod(r, b, p);
    }
    Some(r)
}

/// Splitting of p in ℚ(√d); when split, carries a root of x² ≡ d mod p.
pub fn quadratic_prime_split(d: i64, p: u64) -> Result<QuadraticPrimeSplit> {
    if d == 0 || d == 1 {
        return Err(Error::domain("d must be a squarefree integer != 0, 1"));
    }
    let kind = if (4 * d as i128).rem_euclid(p as i128) == 0 {
        SplitKind::Ramified
    } else {
        match kronecker_symbol(d as i128, p as i128) {
            1 => {
                let dm = (d as i128).rem_euclid(p as i128) as u64;
                let root = sqrt_mod_p(dm, p).expect("residue certified by Kronecker symbol");
                SplitKind::Split { root }
            }
            -1 => SplitKind::Inert,
            _ => unreachable!("p does not divide 4d"),
        }
    };
    Ok(QuadraticPrimeSplit { d, p, kind })
}

/// Legendre symbol of β = a + b√d in the residue field of a degree-1 prime
/// above p, i.e. Legendre(a + b·r, p) via 𝔽_𝔭 ≅ 𝔽_p sending √d to r.
pub fn residue_symbol_deg1(a: i64, b: i64, split: &QuadraticPrimeSplit) -> Result<i32> {
    let SplitKind::Split { root } = split.kind else {
        return Err(Error::domain("residue_symbol_deg1 needs a split prime"));
    };
    let p = split.p;
    let image = (a as i128 + b as i128 * root as i128).rem_euclid(p as i128);
    jacobi_symbol(image, p as u128)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_mod_p_exhaustive_small() {
        for &p in &[3u64, 5, 7, 11, 13, 17, 97, 101, 65537] {
            for n in 0..p.min(200) {
                match sqrt_mod_p(n, p) {
                    Some(r) => assert_eq!(mulmod(r, r, p), n % p, "p={p} n={n}"),
                    None => assert_eq!(jacobi_symbol(n as i128, p as u128).unwrap(), -1),
                }
            }
        }
    }

    #[test]
    fn split_classification() {
        let s = quadratic_prime_split(2, 7).unwrap();
        match s.kind {
            SplitKind::Split { root } => assert!(root == 3 || root == 4),
            _ => panic!("2 is a residue mod 7"),
        }
        assert_eq!(quadratic_prime_split(2, 3).unwrap().kind, SplitKind::Inert);
        assert_eq!(quadratic_prime_split(2, 2).unwrap().kind, SplitKind::Ramified);
        assert_eq!(quadratic_prime_split(-1, 2).unwrap().kind, SplitKind::Ramified);
    }

    #[test]
    fn residue_symbol_examples() {
        // β = √2 at the two primes above 7
        let s3 = QuadraticPrimeSplit {
            d: 2,
            p: 7,
            kind: SplitKind::Split { root: 3 },
        };
        let s4 = QuadraticPrimeSplit {
            d: 2,
            p: 7,
            kind: SplitKind::Split { root: 4 },
        };
        assert_eq!(residue_symbol_deg1(0, 1, &s3).unwrap(), -1);
        assert_eq!(residue_symbol_deg1(0, 1, &s4).unwrap(), 1);
        // rational β = 1 is a square everywhere
        assert_eq!(residue_symbol_deg1(1, 0, &s3).unwrap(), 1);
    }

    #[test]
    fn rational_beta_independent_of_root() {
        // for β ∈ ℤ the symbol equals Jacobi(β, p) whichever root is used
        for &p in &[7u64, 17, 23, 31, 41, 47] {
            let split = quadratic_prime_split(2, p).unwrap();
            let SplitKind::Split { root } = split.kind else {
                continue;
            };
            let other = QuadraticPrimeSplit {
                d: 2,
                p,
                kind: SplitKind::Split { root: p - root },
            };
            for beta in 1..20i64 {
                let v1 = residue_symbol_deg1(beta, 0, &split).unwrap();
                let v2 = residue_symbol_deg1(beta, 0, &other).unwrap();
                let j = jacobi_symbol(beta as i128, p as u128).unwrap();
                assert_eq!(v1, j);
                assert_eq!(v2, j);
            }
        }
    }

    #[test]
    fn sqrt2_asymmetry_for_7_mod_8() {
        // for p ≡ 7 mod 8 split in ℚ(√2), the two primes above p give
        // opposite symbols for β = √2
        let primes = crate::arith::primes::sieve_primes(10_000).unwrap();
        let mut checked = 0;
        for &p in &primes {
            if p % 8 != 7 {
                continue;
            }
            let split = quadratic_prime_split(2, p).unwrap();
            let SplitKind::Split { root } = split.kind else {
                panic!("2 is a residue mod p ≡ 7 mod 8");
            };
            let other = QuadraticPrimeSplit {
                d: 2,
                p,
                kind: SplitKind::Split { root: p - root },
            };
            let a = residue_symbol_deg1(0, 1, &split).unwrap();
            let b = residue_symbol_deg1(0, 1, &other).unwrap();
            assert_eq!(a * b, -1, "p={p}");
            checked += 1;
        }
        assert!(checked > 50);
    }
}
