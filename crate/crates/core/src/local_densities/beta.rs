use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::alpha::{alpha_local_with_budget, count_points, DEFAULT_ENUMERATION_BUDGET};
use super::system::LinearFormSystem;
use crate::error::{Error, Result};

/// β(w_1A_1,…,w_rA_r) = (wW)^{-s}·#{v mod wW : φ_j(v) ≡ w_jA_j mod w_jW},
/// w = lcm(w_j), as an exact rational.
pub fn beta_local(
    system: &LinearFormSystem,
    w_moduli: &[u64],
    big_w: u64,
    residues: &[i64],
) -> Result<Ratio<i64>> {
    beta_local_with_budget(system, w_moduli, big_w, residues, DEFAULT_ENUMERATION_BUDGET)
}

pub fn beta_local_with_budget(
    system: &LinearFormSystem,
    w_moduli: &[u64],
    big_w: u64,
    residues: &[i64],
    budget: u128,
) -> Result<Ratio<i64>> {
    let r = system.r();
    if w_moduli.len() != r || residues.len() != r {
        return Err(Error::domain("need one modulus and one residue per form"));
    }
    if big_w == 0 || w_moduli.iter().any(|&w| w == 0) {
        return Err(Error::domain("moduli must be positive"));
    }
    for &a in residues {
        if num_integer::gcd(a.unsigned_abs(), big_w) != 1 {
            return Err(Error::domain("residues must be coprime to W"));
        }
    }
    let w = w_moduli.iter().fold(1u64, |acc, &wi| num_integer::lcm(acc, wi));
    let m = w.checked_mul(big_w).ok_or(Error::Capacity {
        what: "β modulus",
        needed: u128::MAX,
        budget,
    })? as i64;
    let total = (m as u128).checked_pow(system.s() as u32);
    match total {
        Some(t) if t <= budget => {}
        _ => {
            return Err(Error::Capacity {
                what: "β enumeration",
                needed: total.unwrap_or(u128::MAX),
                budget,
            })
        }
    }
    // φ_j(v) ≡ w_j A_j mod w_j W
    let targets: Vec<(i64, i64)> = w_moduli
        .iter()
        .zip(residues)
        .map(|(&wj, &aj)| {
            let modj = (wj * big_w) as i64;
            ((wj as i64 * aj).rem_euclid(modj), modj)
        })
        .collect();
    let count = count_points(system.forms(), system.s(), m, |vals| {
        vals.iter()
            .zip(&targets)
            .all(|(&v, &(t, modj))| v.rem_euclid(modj) == t)
    });
    Ok(Ratio::new(count as i64, m.pow(system.s() as u32)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub p: u64,
    pub a: u32,
    pub c: Vec<u32>,
    /// Enumeration depth used (must be ≥ a + max c).
    pub m: u32,
    /// Sum over reduced residue tuples mod p^a of the congruence densities.
    pub lhs: Ratio<i64>,
    /// Density of the exact-power condition p^{c_j} ‖ φ_j(v).
    pub mid: Ratio<i64>,
    /// Alternating sum Σ_ε (−1)^{|ε|} α(p^{c+ε}).
    pub rhs: Ratio<i64>,
    pub equal: bool,
}

/// Checks, exactly, the two-step identity linking congruence densities to
/// the alternating α sum, at depth m = a + max c.
pub fn alpha_beta_identity_check(
    system: &LinearFormSystem,
    p: u64,
    a: u32,
    c: &[u32],
) -> Result<IdentityCheck> {
    let m = a + c.iter().max().copied().unwrap_or(0);
    alpha_beta_identity_check_at(system, p, a, c, m)
}

/// Same check at an explicit depth m ≥ a + max c (the value must not
/// depend on m in that range).
pub fn alpha_beta_identity_check_at(
    system: &LinearFormSystem,
    p: u64,
    a: u32,
    c: &[u32],
    m: u32,
) -> Result<IdentityCheck> {
    let r = system.r();
    if c.len() != r {
        return Err(Error::domain("exponent tuple length must equal r"));
    }
    if a == 0 {
        return Err(Error::domain("need a ≥ 1"));
    }
    let cmax = *c.iter().max().unwrap();
    if m < a + cmax {
        return Err(Error::domain("need m ≥ a + max c"));
    }
    let s = system.s();
    let pm = (p as i64).checked_pow(m).ok_or(Error::Capacity {
        what: "identity check modulus",
        needed: u128::MAX,
        budget: DEFAULT_ENUMERATION_BUDGET,
    })?;
    let total = (pm as u128).checked_pow(s as u32);
    match total {
        Some(t) if t <= DEFAULT_ENUMERATION_BUDGET => {}
        _ => {
            return Err(Error::Capacity {
                what: "identity check enumeration",
                needed: total.unwrap_or(u128::MAX),
                budget: DEFAULT_ENUMERATION_BUDGET,
            })
        }
    }
    let pi = p as i64;
    let pc: Vec<i64> = c.iter().map(|&cj| pi.pow(cj)).collect();
    let pac: Vec<i64> = c.iter().map(|&cj| pi.pow(a + cj)).collect();

    // one sweep, counting both descriptions of the same event independently:
    // (lhs) φ_j(v) mod p^{a+c_j} = p^{c_j}·(unit mod p^a) for some reduced
    //       residue, and (mid) p^{c_j} exactly divides φ_j(v)
    let mut lhs_count = 0u64;
    let mut mid_count = 0u64;
    count_points(system.forms(), s, pm, |vals| {
        let mut lhs_ok = true;
        let mut mid_ok = true;
        for j in 0..r {
            let v = vals[j];
            let w = v.rem_euclid(pac[j]);
            if !(w % pc[j] == 0 && (w / pc[j]) % pi != 0) {
                lhs_ok = false;
            }
            if !(v.rem_euclid(pc[j]) == 0 && v.rem_euclid(pc[j] * pi) != 0) {
                mid_ok = false;
            }
            if !lhs_ok && !mid_ok {
                break;
            }
        }
        if lhs_ok {
            lhs_count += 1;
        }
        if mid_ok {
            mid_count += 1;
        }
        false
    });
    let denom = pm.pow(s as u32);
    let lhs = Ratio::new(lhs_count as i64, denom);
    let mid = Ratio::new(mid_count as i64, denom);

    let mut rhs = Ratio::new(0, 1);
    for eps in 0..(1u32 << r) {
        let ce: Vec<u32> = (0..r).map(|j| c[j] + ((eps >> j) & 1)).collect();
        let sign = if eps.count_ones() % 2 == 0 { 1 } else { -1 };
        let av = alpha_local_with_budget(system, p, &ce, DEFAULT_ENUMERATION_BUDGET)?;
        rhs += av * Ratio::new(sign, 1);
    }
    let equal = lhs == mid && mid == rhs;
    Ok(IdentityCheck {
        p,
        a,
        c: c.to_vec(),
        m,
        lhs,
        mid,
        rhs,
        equal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_densities::system::LinearForm;

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

    #[test]
    fn beta_examples() {
        // odd residues mod 2
        assert_eq!(
            beta_local(&single_var(), &[1], 2, &[1]).unwrap(),
            Ratio::new(1, 2)
        );
        // v ≡ 3 mod 9
        assert_eq!(
            beta_local(&single_var(), &[3], 3, &[1]).unwrap(),
            Ratio::new(1, 9)
        );
        // contradictory congruences on dependent forms give 0
        let degenerate = LinearFormSystem::new_lenient(vec![
            LinearForm::new(vec![1], 0),
            LinearForm::new(vec![1], 3),
        ])
        .unwrap();
        // φ₁ ≡ 1 and φ₂ = φ₁ + 3 ≡ 2 mod 5 is impossible (1 + 3 = 4 ≠ 2)
        assert_eq!(
            beta_local(&degenerate, &[1, 1], 5, &[1, 2]).unwrap(),
            Ratio::new(0, 1)
        );
        assert!(beta_local(&single_var(), &[1], 2, &[2]).is_err()); // gcd(2,2)≠1
    }

    #[test]
    fn beta_monotone_under_refinement() {
        // appending a consistent congruence never increases the value
        let sys1 = single_var();
        let sys2 = pair();
        let embedded = LinearFormSystem::new(vec![LinearForm::new(vec![1, 0], 0)]).unwrap();
        for w in [1u64, 3] {
            for a in [1i64, 2] {
                let coarse = beta_local(&embedded, &[w], 7, &[a]).unwrap();
                for a2 in [1i64, 3] {
                    let fine = beta_local(&sys2, &[w, 1], 7, &[a, a2]).unwrap();
                    assert!(fine <= coarse, "w={w} a={a} a2={a2}");
                }
            }
        }
        let _ = sys1;
    }

    #[test]
    fn identity_examples() {
        let chk = alpha_beta_identity_check(&single_var(), 3, 1, &[0]).unwrap();
        assert!(chk.equal);
        assert_eq!(chk.rhs, Ratio::new(2, 3)); // density of 3∤v

        let chk = alpha_beta_identity_check(&single_var(), 5, 1, &[1]).unwrap();
        assert!(chk.equal);
        assert_eq!(chk.rhs, Ratio::new(4, 25)); // 5 ‖ v

        let chk = alpha_beta_identity_check(&pair(), 2, 1, &[1, 0]).unwrap();
        assert!(chk.equal);
        let direct = alpha_local_with_budget(&pair(), 2, &[1, 0], 1 << 20).unwrap()
            - alpha_local_with_budget(&pair(), 2, &[2, 0], 1 << 20).unwrap()
            - alpha_local_with_budget(&pair(), 2, &[1, 1], 1 << 20).unwrap()
            + alpha_local_with_budget(&pair(), 2, &[2, 1], 1 << 20).unwrap();
        assert_eq!(chk.rhs, direct);
    }

    #[test]
    fn identity_depth_independence_small() {
        for p in [2u64, 3] {
            for a in 1..=2u32 {
                for c0 in 0..=1u32 {
                    for c1 in 0..=1u32 {
                        let m0 = a + c0.max(c1);
                        let k1 = alpha_beta_identity_check_at(&pair(), p, a, &[c0, c1], m0)
                            .unwrap();
                        let k2 = alpha_beta_identity_check_at(&pair(), p, a, &[c0, c1], m0 + 1)
                            .unwrap();
                        assert!(k1.equal && k2.equal, "p={p} a={a} c=({c0},{c1})");
                        assert_eq!(k1.lhs, k2.lhs);
                        assert_eq!(k1.rhs, k2.rhs);
                    }
                }
            }
        }
    }
}
