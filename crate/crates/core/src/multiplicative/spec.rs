use serde::{Deserialize, Serialize};

use crate::arith::FactoredInteger;
use crate::error::{Error, Result};
use crate::frobenian::FrobenianSpec;
use crate::value::Scalar;

/// How a frobenian base ρ(p) extends to prime powers ρ(p^k).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrimePowerRule {
    /// ρ(p^k) = ρ(p)^k.
    CompletelyMultiplicative,
    /// Completely multiplicative with values in {0,1}: the indicator of
    /// integers all of whose prime factors lie in the base's support.
    IndicatorSet,
    /// ρ(p^k) = k + 1 (divisor-function type; the base must be ≡ 2).
    DivisorFunction,
    /// ρ(p^k) = 1 when ρ(p) = 1; otherwise 1 for even k and ρ(p) for odd k
    /// (sums-of-two-squares type).
    EvenExponentOne,
    /// ρ(p) at k = 1, and 0 for k ≥ 2 (squarefree-supported).
    SquarefreeSupport,
}

/// A multiplicative function determined by a frobenian function on primes
/// and a prime-power extension rule, with |ρ(p^k)| ≤ growth^k.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrobMultSpec {
    base: FrobenianSpec,
    rule: PrimePowerRule,
    growth: u32,
}

impl FrobMultSpec {
    pub fn new(base: FrobenianSpec, rule: PrimePowerRule, growth: u32) -> Result<FrobMultSpec> {
        if growth == 0 {
            return Err(Error::domain("growth bound must be positive"));
        }
        let spec = FrobMultSpec { base, rule, growth };
        if rule == PrimePowerRule::IndicatorSet {
            spec.check_indicator()?;
        }
        // spot-check the growth bound on small primes and exponents
        let primes = crate::arith::sieve_primes(100)?;
        for &p in &primes {
            for k in 1..=4u32 {
                let v = spec.eval_prime_power(p, k).to_c64().norm();
                if v > (growth as f64).powi(k as i32) + 1e-9 {
                    return Err(Error::domain(format!(
                        "growth bound {growth} violated at {p}^{k} (|value| = {v})"
                    )));
                }
            }
        }
        Ok(spec)
    }

    fn check_indicator(&self) -> Result<()> {
        let primes = crate::arith::sieve_primes(1000)?;
        for &p in primes.iter().chain(self.base.exceptional_set()) {
            let v = self.base.eval_prime(p);
            if !v.is_zero() && v != Scalar::ONE {
                return Err(Error::domain(format!(
                    "indicator rule needs values in {{0,1}}, got {v:?} at p = {p}"
                )));
            }
        }
        Ok(())
    }

    pub fn base(&self) -> &FrobenianSpec {
        &self.base
    }

    pub fn rule(&self) -> PrimePowerRule {
        self.rule
    }

    pub fn growth(&self) -> u32 {
        self.growth
    }

    /// ρ(p^k) for k ≥ 1.
    pub fn eval_prime_power(&self, p: u64, k: u32) -> Scalar {
        debug_assert!(k >= 1);
        match self.rule {
            PrimePowerRule::CompletelyMultiplicative | PrimePowerRule::IndicatorSet => {
                self.base.eval_prime(p).pow(k)
            }
            PrimePowerRule::DivisorFunction => Scalar::from_int(k as i64 + 1),
            PrimePowerRule::EvenExponentOne => {
                let b = self.base.eval_prime(p);
                if b == Scalar::ONE || k % 2 == 0 {
                    Scalar::ONE
                } else {
                    b
                }
            }
            PrimePowerRule::SquarefreeSupport => {
                if k == 1 {
                    self.base.eval_prime(p)
                } else {
                    Scalar::ZERO
                }
            }
        }
    }

    /// ρ(n) as the product over the prime-power parts of n; 0 for n ≤ 0.
    pub fn evaluate(&self, n: &FactoredInteger) -> Scalar {
        if n.value <= 0 {
            return Scalar::ZERO;
        }
        let mut acc = Scalar::ONE;
        for &(p, k) in &n.factors {
            acc = acc.mul(&self.eval_prime_power(p, k));
            if acc.is_zero() {
                return Scalar::ZERO;
            }
        }
        acc
    }
}

/// The completely multiplicative {0,1} indicator of "every prime factor
/// lies in the support of `base`", with the convention that exceptional
/// primes count as support.
pub fn indicator_from_prime_set(base: &FrobenianSpec) -> Result<FrobMultSpec> {
    let base = base.with_exceptional_values_set_to(Scalar::ONE);
    FrobMultSpec::new(base, PrimePowerRule::IndicatorSet, 1)
}

#[cfg(test)]
pub(crate) mod test_specs {
    use super::*;
    use crate::frobenian::DirichletCharacter;

    /// ρ ≡ 1.
    pub fn one() -> FrobMultSpec {
        let base = FrobenianSpec::character_combo(
            vec![(DirichletCharacter::trivial(), Scalar::ONE)],
            vec![],
        )
        .unwrap();
        FrobMultSpec::new(base, PrimePowerRule::CompletelyMultiplicative, 1).unwrap()
    }

    /// The divisor function τ.
    pub fn tau() -> FrobMultSpec {
        let base = FrobenianSpec::character_combo(
            vec![(DirichletCharacter::trivial(), Scalar::from_int(2))],
            vec![],
        )
        .unwrap();
        FrobMultSpec::new(base, PrimePowerRule::DivisorFunction, 2).unwrap()
    }

    /// The indicator b of sums of two squares.
    pub fn two_squares() -> FrobMultSpec {
        let chi = DirichletCharacter::from_discriminant(-4).unwrap();
        let base = FrobenianSpec::character_combo(
            vec![
                (DirichletCharacter::trivial(), Scalar::from_ratio(1, 2)),
                (chi, Scalar::from_ratio(1, 2)),
            ],
            vec![(2, Scalar::ONE)],
        )
        .unwrap();
        FrobMultSpec::new(base, PrimePowerRule::EvenExponentOne, 1).unwrap()
    }

    /// μ², the indicator of squarefree integers.
    pub fn mu_squared() -> FrobMultSpec {
        let base = FrobenianSpec::character_combo(
            vec![(DirichletCharacter::trivial(), Scalar::ONE)],
            vec![],
        )
        .unwrap();
        FrobMultSpec::new(base, PrimePowerRule::SquarefreeSupport, 1).unwrap()
    }

    /// ϖ for the prime set {p ≡ 1 mod 4} ∪ {2}.
    pub fn varpi_one_mod_four() -> FrobMultSpec {
        let chi = DirichletCharacter::from_discriminant(-4).unwrap();
        let base = FrobenianSpec::character_combo(
            vec![
                (DirichletCharacter::trivial(), Scalar::from_ratio(1, 2)),
                (chi, Scalar::from_ratio(1, 2)),
            ],
            vec![(2, Scalar::ONE)],
        )
        .unwrap();
        indicator_from_prime_set(&base).unwrap()
    }

    pub fn library() -> Vec<(&'static str, FrobMultSpec)> {
        vec![
            ("one", one()),
            ("tau", tau()),
            ("two_squares", two_squares()),
            ("mu_squared", mu_squared()),
            ("varpi_1mod4", varpi_one_mod_four()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::test_specs::*;
    use super::*;
    use crate::arith::{spf_factor, SpfTable};

    fn ev(spec: &FrobMultSpec, n: i128, table: &SpfTable) -> f64 {
        spec.evaluate(&spf_factor(n, table).unwrap()).to_c64().re
    }

    #[test]
    fn pointwise_examples() {
        let table = SpfTable::new(1000).unwrap();
        let b = two_squares();
        assert_eq!(ev(&b, 45, &table), 1.0); // 45 = 36 + 9
        assert_eq!(ev(&b, 21, &table), 0.0); // 3 to odd order
        assert_eq!(ev(&b, 1, &table), 1.0);
        assert_eq!(ev(&b, 2, &table), 1.0);
        assert_eq!(ev(&b, 3, &table), 0.0);
        assert_eq!(ev(&b, 9, &table), 1.0);

        let t = tau();
        for (n, want) in [(1, 1.0), (6, 4.0), (12, 6.0), (16, 5.0), (36, 9.0)] {
            assert_eq!(ev(&t, n, &table), want, "tau({n})");
        }

        let m2 = mu_squared();
        assert_eq!(ev(&m2, 30, &table), 1.0);
        assert_eq!(ev(&m2, 12, &table), 0.0);

        let w = varpi_one_mod_four();
        assert_eq!(ev(&w, 90, &table), 0.0); // 3 ∤∈ P
        assert_eq!(ev(&w, 50, &table), 1.0); // 2 · 5²
    }

    #[test]
    fn multiplicativity_on_coprime_pairs() {
        let table = SpfTable::new(1 << 16).unwrap();
        let specs = library();
        let mut state = 0x243f6a8885a308d3u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let mut checked = 0;
        while checked < 10_000 {
            let m = (next() % 5000 + 1) as i128;
            let n = (next() % 5000 + 1) as i128;
            if num_integer::gcd(m, n) != 1 {
                continue;
            }
            checked += 1;
            for (name, s) in &specs {
                let lhs = ev(s, m * n, &table);
                let rhs = ev(s, m, &table) * ev(s, n, &table);
                assert_eq!(lhs, rhs, "{name} at {m}·{n}");
            }
        }
    }

    #[test]
    fn growth_and_idempotence() {
        let table = SpfTable::new(20_000).unwrap();
        for (name, s) in library() {
            let h = s.growth() as f64;
            for n in 1..=5000i128 {
                let f = spf_factor(n, &table).unwrap();
                let omega: u32 = f.factors.iter().map(|&(_, k)| k).sum();
                let v = s.evaluate(&f).to_c64().norm();
                assert!(v <= h.powi(omega as i32) + 1e-9, "{name} at {n}");
                if s.rule() == PrimePowerRule::IndicatorSet {
                    assert!(v == 0.0 || v == 1.0, "{name} at {n}");
                }
            }
        }
    }

    #[test]
    fn negative_and_zero_inputs() {
        let table = SpfTable::new(100).unwrap();
        let t = tau();
        assert_eq!(ev(&t, -6, &table), 0.0);
        assert!(t.evaluate(&crate::arith::FactoredInteger::zero()).is_zero());
    }

    #[test]
    fn indicator_rejects_non_indicator_base() {
        let base = FrobenianSpec::character_combo(
            vec![(crate::frobenian::DirichletCharacter::trivial(), Scalar::from_int(2))],
            vec![],
        )
        .unwrap();
        assert!(indicator_from_prime_set(&base).is_err());
    }
}
