use num_rational::Ratio;

use super::system::{LinearForm, LinearFormSystem};
use crate::error::{Error, Result};

/// Default cap on the number of points enumerated per density.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1 << 29;

/// Counts points of (ℤ/modulus)^s passing `check`, feeding it the exact
/// integer values of all forms at the current point (incremental odometer;
/// values are not reduced).
pub(crate) fn count_points(
    forms: &[LinearForm],
    s: usize,
    modulus: i64,
    mut check: impl FnMut(&[i64]) -> bool,
) -> u64 {
    debug_assert!(modulus >= 1);
    let mut vals: Vec<i64> = forms.iter().map(|f| f.constant).collect();
    let mut coords = vec![0i64; s];
    let mut count = 0u64;
    loop {
        if check(&vals) {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == s {
                return count;
            }
            coords[i] += 1;
            for (j, f) in forms.iter().enumerate() {
                vals[j] += f.coeffs[i];
            }
            if coords[i] < modulus {
                break;
            }
            for (j, f) in forms.iter().enumerate() {
                vals[j] -= modulus * f.coeffs[i];
            }
            coords[i] = 0;
            i += 1;
        }
    }
}

fn checked_pow(p: u64, e: u32) -> Result<i64> {
    (p as i64).checked_pow(e).ok_or(Error::Capacity {
        what: "prime power overflows i64",
        needed: (p as u128) << e,
        budget: i64::MAX as u128,
    })
}

/// The local divisor density
/// α(p^{c_1},…,p^{c_r}) = p^{-ms}·#{u ∈ (ℤ/p^m)^s : p^{c_i} | φ_i(u) ∀i},
/// m = max c, as an exact rational.
pub fn alpha_local(system: &LinearFormSystem, p: u64, c: &[u32]) -> Result<Ratio<i64>> {
    alpha_local_with_budget(system, p, c, DEFAULT_ENUMERATION_BUDGET)
}

pub fn alpha_local_with_budget(
    system: &LinearFormSystem,
    p: u64,
    c: &[u32],
    budget: u128,
) -> Result<Ratio<i64>> {
    if c.len() != system.r() {
        return Err(Error::domain("exponent tuple length must equal r"));
    }
    let m = *c.iter().max().unwrap();
    if m == 0 {
        return Ok(Ratio::new(1, 1));
    }
    // single-condition short cut: a form with a unit coefficient mod p hits
    // every residue class mod p^c equally often, so the density is p^{-c}
    let positive: Vec<usize> = (0..c.len()).filter(|&i| c[i] > 0).collect();
    if positive.len() == 1 {
        let i = positive[0];
        let unit_coeff = system.forms()[i]
            .coeffs
            .iter()
            .any(|&a| a.unsigned_abs() % p != 0);
        if unit_coeff {
            return Ok(Ratio::new(1, checked_pow(p, c[i])?));
        }
    }
    let s = system.s();
    let pm = checked_pow(p, m)?;
    let total = (pm as u128).checked_pow(s as u32).ok_or(Error::Capacity {
        what: "density enumeration",
        needed: u128::MAX,
        budget,
    })?;
    if total > budget {
        return Err(Error::Capacity {
            what: "density enumeration",
            needed: total,
            budget,
        });
    }
    let moduli: Vec<i64> = c.iter().map(|&ci| checked_pow(p, ci)).collect::<Result<_>>()?;
    let count = count_points(system.forms(), s, pm, |vals| {
        vals.iter()
            .zip(&moduli)
            .all(|(&v, &q)| v.rem_euclid(q) == 0)
    });
    Ok(Ratio::new(count as i64, pm.pow(s as u32)))
}

/// α extended multiplicatively: the product over primes p | lcm(n) of the
/// local densities at the p-parts of (n_1,…,n_r).
pub fn alpha_multi(system: &LinearFormSystem, n: &[u64]) -> Result<Ratio<i64>> {
    if n.len() != system.r() {
        return Err(Error::domain("argument tuple length must equal r"));
    }
    if n.iter().any(|&ni| ni == 0) {
        return Err(Error::domain("arguments must be positive"));
    }
    let mut primes: Vec<u64> = Vec::new();
    let mut fac = Vec::new();
    for &ni in n {
        if ni > 1 {
            fac.clear();
            crate::arith::factor_u64(ni, &mut fac);
            primes.extend(fac.iter().map(|&(p, _)| p));
        }
    }
    primes.sort_unstable();
    primes.dedup();
    let mut acc: Ratio<i64> = Ratio::new(1, 1);
    for p in primes {
        let c: Vec<u32> = n
            .iter()
            .map(|&ni| crate::arith::padic_valuation(ni as i128, p).unwrap())
            .collect();
        let a = alpha_local(system, p, &c)?;
        acc = mul_checked(acc, a)?;
    }
    Ok(acc)
}

fn mul_checked(a: Ratio<i64>, b: Ratio<i64>) -> Result<Ratio<i64>> {
    let num = (*a.numer() as i128) * (*b.numer() as i128);
    let den = (*a.denom() as i128) * (*b.denom() as i128);
    let g = num_integer::gcd(num, den);
    let (num, den) = (num / g, den / g);
    match (i64::try_from(num), i64::try_from(den)) {
        (Ok(n), Ok(d)) => Ok(Ratio::new(n, d)),
        _ => Err(Error::Capacity {
            what: "rational overflow in density product",
            needed: den.unsigned_abs(),
            budget: i64::MAX as u128,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_var() -> LinearFormSystem {
        LinearFormSystem::new(vec![LinearForm::new(vec![1], 0)]).unwrap()
    }

    fn pair() -> LinearFormSystem {
        LinearFormSystem::new(vec![
            LinearForm::new(vec![1, 0], 0),
            LinearForm::new(vec![1, 1], 0),
        ])
        .unwrap()
    }

    /// α by raw enumeration without the unit-coefficient shortcut.
    fn alpha_raw(system: &LinearFormSystem, p: u64, c: &[u32]) -> Ratio<i64> {
        let m = *c.iter().max().unwrap();
        let pm = (p as i64).pow(m);
        let moduli: Vec<i64> = c.iter().map(|&ci| (p as i64).pow(ci)).collect();
        let count = count_points(system.forms(), system.s(), pm.max(1), |vals| {
            vals.iter().zip(&moduli).all(|(&v, &q)| v.rem_euclid(q) == 0)
        });
        Ratio::new(count as i64, pm.max(1).pow(system.s() as u32))
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_local(&single_var(), 3, &[2]).unwrap(), Ratio::new(1, 9));
        assert_eq!(alpha_local(&pair(), 5, &[0, 0]).unwrap(), Ratio::new(1, 1));
        assert_eq!(alpha_local(&pair(), 5, &[1, 1]).unwrap(), Ratio::new(1, 25));
    }

    #[test]
    fn shortcut_matches_enumeration() {
        let systems = [
            pair(),
            LinearFormSystem::new(vec![
                LinearForm::new(vec![2, 3], 1),
                LinearForm::new(vec![1, -1], 0),
            ])
            .unwrap(),
        ];
        for sys in &systems {
            for p in [2u64, 3, 5, 7] {
                for c0 in 0..3u32 {
                    for c1 in 0..3u32 {
                        let fast = alpha_local(sys, p, &[c0, c1]).unwrap();
                        let slow = alpha_raw(sys, p, &[c0, c1]);
                        assert_eq!(fast, slow, "p={p} c=({c0},{c1})");
                    }
                }
            }
        }
    }

    #[test]
    fn evaluation_bounds_for_large_primes() {
        // for p > 2·‖φ‖·r·s: one positive exponent gives exactly p^{-max c},
        // two or more give at most p^{-(c_i+c_j)}
        let sys = LinearFormSystem::new(vec![
            LinearForm::new(vec![1, 2], 3),
            LinearForm::new(vec![2, -1], 0),
            LinearForm::new(vec![1, 1], 1),
        ])
        .unwrap();
        let bound = 2 * sys.norm() * (sys.r() as i64) * (sys.s() as i64);
        for p in [37u64, 41, 53] {
            assert!((p as i64) > bound);
            for &(i, ci) in [(0usize, 2u32), (1, 1), (2, 2)].iter() {
                let mut c = vec![0u32; 3];
                c[i] = ci;
                let a = alpha_local(&sys, p, &c).unwrap();
                assert_eq!(a, Ratio::new(1, (p as i64).pow(ci)), "p={p} i={i}");
            }
            let a = alpha_local(&sys, p, &[1, 1, 0]).unwrap();
            assert!(a <= Ratio::new(1, (p as i64).pow(2)));
        }
    }

    #[test]
    fn multi_examples_and_crt() {
        assert_eq!(alpha_multi(&pair(), &[1, 1]).unwrap(), Ratio::new(1, 1));
        assert_eq!(alpha_multi(&pair(), &[2, 3]).unwrap(), Ratio::new(1, 6));
        assert_eq!(alpha_multi(&single_var(), &[12]).unwrap(), Ratio::new(1, 12));
        // CRT multiplicativity on coprime tuples
        for (a, b) in [((2u64, 3u64), (5u64, 7u64)), ((4, 1), (9, 5)), ((8, 3), (25, 7))] {
            let lhs = alpha_multi(&pair(), &[a.0 * b.0, a.1 * b.1]).unwrap();
            let rhs = alpha_multi(&pair(), &[a.0, a.1]).unwrap()
                * alpha_multi(&pair(), &[b.0, b.1]).unwrap();
            assert_eq!(lhs, rhs, "{a:?} x {b:?}");
        }
    }

    #[test]
    fn budget_is_enforced() {
        let r = alpha_local_with_budget(&pair(), 7, &[5, 5], 1000);
        assert!(matches!(r, Err(Error::Capacity { .. })));
    }
}
