use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A place of ℚ: the real place or a finite prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Place {
    Real,
    Prime(u64),
}

/// Jacobi symbol (a|n) for odd positive n.
pub fn jacobi_symbol(a: i128, n: u128) -> Result<i32> {
    if n == 0 || n % 2 == 0 {
        return Err(Error::domain("jacobi symbol needs odd positive modulus"));
    }
    let mut n = n;
    let mut a = a.rem_euclid(n as i128) as u128;
    let mut acc = 1i32;
    loop {
        a %= n;
        if a == 0 {
            return Ok(if n == 1 { acc } else { 0 });
        }
        while a % 2 == 0 {
            a /= 2;
            // supplement: (2|n) = (-1)^((n²-1)/8)
            if matches!(n % 8, 3 | 5) {
                acc = -acc;
            }
        }
        if a == 1 {
            return Ok(acc);
        }
        // reciprocity for odd coprime arguments; common factors give 0 later
        if a % 4 == 3 && n % 4 == 3 {
            acc = -acc;
        }
        std::mem::swap(&mut a, &mut n);
    }
}

/// Kronecker symbol (a|n), extending Jacobi to all integers n.
pub fn kronecker_symbol(a: i128, n: i128) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut acc = 1i32;
    let mut n_abs = n.unsigned_abs();
    if n < 0 && a < 0 {
        acc = -acc;
    }
    let mut twos = 0u32;
    while n_abs % 2 == 0 {
        n_abs /= 2;
        twos += 1;
    }
    if twos > 0 {
        if a % 2 == 0 {
            return 0;
        }
        // (a|2) = (-1)^((a²-1)/8), applied `twos` times
        if twos % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            acc = -acc;
        }
    }
    acc * jacobi_symbol(a, n_abs).expect("odd positive by construction")
}

fn split_valuation(mut n: i128, p: u64) -> (u32, i128) {
    let p = p as i128;
    let mut v = 0u32;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    (v, n)
}

/// ε(u) = (u−1)/2 mod 2 for odd u.
#[inline]
fn eps2(u: i128) -> u32 {
    (u.rem_euclid(4) == 3) as u32
}

/// ω(u) = (u²−1)/8 mod 2 for odd u.
#[inline]
fn omega2(u: i128) -> u32 {
    matches!(u.rem_euclid(8), 3 | 5) as u32
}

/// Hilbert symbol (a,b)_v: +1 iff x² − a·y² − b·z² = 0 has a nontrivial
/// solution over the completion at v.
pub fn hilbert_symbol(a: i128, b: i128, place: Place) -> Result<i32> {
    if a == 0 || b == 0 {
        return Err(Error::domain("hilbert symbol needs nonzero arguments"));
    }
    match place {
        Place::Real => Ok(if a < 0 && b < 0 { -1 } else { 1 }),
        Place::Prime(2) => {
            let (alpha, u) = split_valuation(a, 2);
            let (beta, v) = split_valuation(b, 2);
            let e = eps2(u) * eps2(v) + alpha * omega2(v) + beta * omega2(u);
            Ok(if e % 2 == 0 { 1 } else { -1 })
        }
        Place::Prime(p) => {
            debug_assert!(p % 2 == 1, "prime place must be prime");
            let (alpha, u) = split_valuation(a, p);
            let (beta, v) = split_valuation(b, p);
            let mut s = 1i32;
            if alpha % 2 == 1 && beta % 2 == 1 && (p % 4) == 3 {
                s = -s;
            }
            if beta % 2 == 1 {
                s *= jacobi_symbol(u, p as u128)?;
            }
            if alpha % 2 == 1 {
                s *= jacobi_symbol(v, p as u128)?;
            }
            Ok(s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_basics() {
        assert_eq!(jacobi_symbol(2, 7).unwrap(), 1);
        assert_eq!(jacobi_symbol(3, 7).unwrap(), -1);
        assert_eq!(jacobi_symbol(14, 7).unwrap(), 0);
        assert_eq!(jacobi_symbol(1001, 9907).unwrap(), -1);
        assert!(jacobi_symbol(2, 4).is_err());
    }

    #[test]
    fn jacobi_against_euler_criterion() {
        let primes = crate::arith::primes::sieve_primes(200).unwrap();
        for &p in primes.iter().filter(|&&p| p > 2) {
            for a in 1..p as i128 {
                let euler = {
                    let mut r = 1u64;
                    let mut base = a as u64 % p;
                    let mut e = (p - 1) / 2;
                    while e > 0 {
                        if e & 1 == 1 {
                            r = r * base % p;
                        }
                        base = base * base % p;
                        e >>= 1;
                    }
                    if r == 1 {
                        1
                    } else {
                        -1
                    }
                };
                assert_eq!(jacobi_symbol(a, p as u128).unwrap(), euler, "a={a} p={p}");
            }
        }
    }

    #[test]
    fn kronecker_special_values() {
        assert_eq!(kronecker_symbol(2, 2), 0);
        assert_eq!(kronecker_symbol(7, 2), 1);
        assert_eq!(kronecker_symbol(3, 2), -1);
        assert_eq!(kronecker_symbol(5, 0), 0);
        assert_eq!(kronecker_symbol(-1, 0), 1);
        // fundamental discriminant -4: χ(n) = ±1 by n mod 4
        assert_eq!(kronecker_symbol(-4, 5), 1);
        assert_eq!(kronecker_symbol(-4, 7), -1);
        // discriminant 8: support ±1 mod 8
        assert_eq!(kronecker_symbol(8, 7), 1);
        assert_eq!(kronecker_symbol(8, 3), -1);
    }

    #[test]
    fn hilbert_known_values() {
        assert_eq!(hilbert_symbol(-1, -1, Place::Real).unwrap(), -1);
        assert_eq!(hilbert_symbol(3, 5, Place::Prime(7)).unwrap(), 1);
        assert_eq!(hilbert_symbol(-1, -1, Place::Prime(2)).unwrap(), -1);
        assert_eq!(hilbert_symbol(3, 7, Place::Prime(7)).unwrap(), -1);
        assert_eq!(hilbert_symbol(2, 7, Place::Prime(7)).unwrap(), 1);
    }

    #[test]
    fn hilbert_symmetric_and_square_stable() {
        for a in [-10i128, -3, -1, 2, 5, 6, 7] {
            for b in [-7i128, -2, 3, 10, 15] {
                for place in [Place::Real, Place::Prime(2), Place::Prime(3), Place::Prime(5)] {
                    let ab = hilbert_symbol(a, b, place).unwrap();
                    assert_eq!(ab, hilbert_symbol(b, a, place).unwrap());
                    assert_eq!(ab, hilbert_symbol(a * 9, b, place).unwrap());
                    // (a,b)(a,b') = (a, bb')
                    for b2 in [2i128, -5, 11] {
                        let lhs = ab * hilbert_symbol(a, b2, place).unwrap();
                        assert_eq!(lhs, hilbert_symbol(a, b * b2, place).unwrap());
                    }
                }
            }
        }
    }
}
