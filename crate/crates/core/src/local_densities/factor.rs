use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::alpha::{alpha_local_with_budget, count_points, DEFAULT_ENUMERATION_BUDGET};
use super::system::LinearFormSystem;
use crate::arith::{factor_u64, sieve_primes};
use crate::error::{Error, Result};
use crate::multiplicative::{gamma, FrobMultSpec};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LargePrimeFactor {
    pub p: u64,
    pub k_max: u32,
    /// The truncated a-sum Σ_a ∏_i ρ_i(p^{a_i})/(1−1/p) · Σ_ε (−1)^{|ε|} α(p^{a+ε}).
    pub exact: f64,
    /// The first-order approximation ∏_i (1 + ρ_i(p)/p).
    pub approx: f64,
    pub gap: f64,
    /// Crude geometric bound on the discarded tail with max a > k_max.
    pub tail_bound: f64,
}

/// The single-prime factor of the leading constant at a large prime p,
/// truncated at exponents a_i ≤ k_max, against its first-order
/// approximation ∏ (1 + ρ_i(p)/p).
pub fn large_prime_factor(
    system: &LinearFormSystem,
    specs: &[FrobMultSpec],
    p: u64,
    k_max: u32,
) -> Result<LargePrimeFactor> {
    let r = system.r();
    if specs.len() != r {
        return Err(Error::domain("need one spec per form"));
    }
    let h = specs.iter().map(|s| s.growth()).max().unwrap() as u64;
    if h >= p {
        return Err(Error::domain(
            "inner series may diverge: growth bound is not below p",
        ));
    }
    // ρ_i(p^a) for 0 ≤ a ≤ k_max + 1
    let rho: Vec<Vec<f64>> = specs
        .iter()
        .map(|s| {
            (0..=k_max + 1)
                .map(|a| {
                    if a == 0 {
                        1.0
                    } else {
                        s.eval_prime_power(p, a).to_c64().re
                    }
                })
                .collect()
        })
        .collect();
    let mut alpha_memo: HashMap<Vec<u32>, f64> = HashMap::new();
    let mut alpha = |c: &[u32]| -> Result<f64> {
        if let Some(&v) = alpha_memo.get(c) {
            return Ok(v);
        }
        let a = alpha_local_with_budget(system, p, c, DEFAULT_ENUMERATION_BUDGET)?;
        let v = *a.numer() as f64 / *a.denom() as f64;
        alpha_memo.insert(c.to_vec(), v);
        Ok(v)
    };

    let scale = 1.0 / (1.0 - 1.0 / p as f64);
    let mut exact = 0.0f64;
    let mut tuple = vec![0u32; r];
    loop {
        let weight: f64 = (0..r).map(|i| rho[i][tuple[i] as usize]).product();
        if weight != 0.0 {
            let mut inner = 0.0;
            for eps in 0..(1u32 << r) {
                let ce: Vec<u32> = (0..r).map(|j| tuple[j] + ((eps >> j) & 1)).collect();
                let sign = if eps.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                inner += sign * alpha(&ce)?;
            }
            exact += weight * scale.powi(r as i32) * inner;
        }
        // odometer over 0..=k_max per coordinate
        let mut i = 0;
        loop {
            if i == r {
                tuple.clear();
                break;
            }
            tuple[i] += 1;
            if tuple[i] <= k_max {
                break;
            }
            tuple[i] = 0;
            i += 1;
        }
        if tuple.is_empty() {
            break;
        }
    }

    let approx: f64 = specs
        .iter()
        .map(|s| 1.0 + s.eval_prime_power(p, 1).to_c64().re / p as f64)
        .product();
    // terms with max a = k contribute O(k^r H^{rk} p^{-k}); bound the tail
    // geometrically (valid since H^r may still exceed p; then report ∞)
    let t = (h as f64).powi(r as i32) / p as f64;
    let kf = (k_max + 1) as f64;
    let tail_bound = if t < 1.0 {
        2f64.powi(r as i32) * (kf + 1.0).powi(r as i32) * t.powf(kf) / (1.0 - t)
    } else {
        f64::INFINITY
    };
    Ok(LargePrimeFactor {
        p,
        k_max,
        exact,
        approx,
        gap: (exact - approx).abs(),
        tail_bound,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncatedLeadingConstant {
    pub c_star: f64,
    /// Half-width of the multiplicative (1 + O(B₀^{-1/2})) caveat.
    pub interval_halfwidth: f64,
    pub b0: u64,
    pub u_bound: u64,
    pub q0: u64,
    /// lcm of exceptional-character conductors, per spec.
    pub exceptional_conductors: Vec<u64>,
}

fn smooth_numbers(bound: u64, primes: &[u64]) -> Vec<u64> {
    let mut out = vec![1u64];
    for &p in primes {
        let mut extra = Vec::new();
        for &u in &out {
            let mut v = u;
            while let Some(next) = v.checked_mul(p) {
                if next > bound {
                    break;
                }
                extra.push(next);
                v = next;
            }
        }
        out.extend(extra);
    }
    out.sort_unstable();
    out
}

/// The truncated leading constant: exceptional-character sums, the
/// e^{-γm}/Γ(m) factors, and the small-prime congruence-density factor with
/// u_i ≤ u_bound, all primes ≤ B₀. The unbounded-B₀ caveat is carried as an
/// explicit interval half-width B₀^{-1/2}, never folded into the value.
pub fn truncated_leading_constant(
    system: &LinearFormSystem,
    specs: &[FrobMultSpec],
    b0: u64,
    u_bound: u64,
    conductor_bound: u64,
) -> Result<TruncatedLeadingConstant> {
    let r = system.r();
    let s = system.s();
    if specs.len() != r {
        return Err(Error::domain("need one spec per form"));
    }
    let small_primes = sieve_primes(b0)?;

    // exceptional characters and their conductor lcm, per spec
    let mut chars = Vec::with_capacity(r);
    let mut q_rho = Vec::with_capacity(r);
    let mut q_all: u64 = 1;
    for spec in specs {
        let e = spec.base().exceptional_characters(conductor_bound, 10_000)?;
        let ql = e.iter().fold(1u64, |acc, c| num_integer::lcm(acc, c.conductor()));
        let mut fac = Vec::new();
        if ql > 1 {
            factor_u64(ql, &mut fac);
            if fac.iter().any(|&(p, _)| p > b0) {
                return Err(Error::domain(
                    "B₀ must exceed every prime of the exceptional conductors",
                ));
            }
        }
        for c in &e {
            q_all = q_all.saturating_mul(c.conductor());
        }
        chars.push(e);
        q_rho.push(ql);
    }
    // Q₀ = ∏_{p≤B₀} p^{1+v_p(q)}
    let mut q0: u64 = 1;
    for &p in &small_primes {
        let mut e = 1u32;
        let mut q = q_all;
        while q % p == 0 {
            q /= p;
            e += 1;
        }
        q0 = q0.checked_mul(p.pow(e)).ok_or(Error::Capacity {
            what: "Q₀ overflow",
            needed: u128::MAX,
            budget: u64::MAX as u128,
        })?;
    }

    // front factors: ∏_j e^{-γ m_j}/Γ(m_j) and ∏_{p≤B₀} (1-1/p)^{-r}
    let mut front = 1.0f64;
    for spec in specs {
        let m = spec.base().mean()?.value.to_c64().re;
        if m <= 0.0 {
            return Err(Error::domain("leading constant needs positive means"));
        }
        front *= (-EULER_GAMMA * m).exp() / gamma(m);
    }
    for &p in &small_primes {
        front *= (1.0 - 1.0 / p as f64).powi(-(r as i32));
    }

    // character weight W_j(t) = Σ_{χ ∈ E_j} χ̄(t), for t a unit mod Q₀
    let weight = |j: usize, t: i64| -> f64 {
        chars[j]
            .iter()
            .map(|c| c.eval(t as i128).conj().to_c64().re)
            .sum()
    };

    // Σ over B₀-smooth u tuples of ∏ρ_i(u_i) · (uQ₀)^{-s} · Σ_v ∏_j [..]
    let smooth = smooth_numbers(u_bound, &small_primes);
    let spf = crate::arith::SpfTable::new(u_bound.max(2))?;
    let mut total = 0.0f64;
    let mut tuple = vec![0usize; r];
    'tuples: loop {
        let u_vals: Vec<u64> = tuple.iter().map(|&i| smooth[i]).collect();
        let mut weight_u = 1.0f64;
        for (i, spec) in specs.iter().enumerate() {
            let f = crate::arith::spf_factor(u_vals[i] as i128, &spf)?;
            weight_u *= spec.evaluate(&f).to_c64().re;
        }
        if weight_u != 0.0 {
            let u = u_vals.iter().fold(1u64, |acc, &x| num_integer::lcm(acc, x));
            let modulus = (u as i64) * (q0 as i64);
            let points = (modulus as u128).checked_pow(s as u32);
            match points {
                Some(t) if t <= DEFAULT_ENUMERATION_BUDGET => {}
                _ => {
                    return Err(Error::Capacity {
                        what: "leading constant enumeration",
                        needed: points.unwrap_or(u128::MAX),
                        budget: DEFAULT_ENUMERATION_BUDGET,
                    })
                }
            }
            // L_j(v) ≡ u_j A_j mod u_j Q₀ determines A_j = L_j(v)/u_j mod Q₀
            let mods: Vec<i64> = u_vals.iter().map(|&uj| (uj * q0) as i64).collect();
            let mut inner = 0.0f64;
            count_points(system.forms(), s, modulus, |vals| {
                let mut w = 1.0f64;
                for j in 0..r {
                    let res = vals[j].rem_euclid(mods[j]);
                    if res % u_vals[j] as i64 != 0 {
                        w = 0.0;
                        break;
                    }
                    let t = res / u_vals[j] as i64; // A_j mod Q₀
                    if num_integer::gcd(t as u64, q0) != 1 {
                        w = 0.0;
                        break;
                    }
                    w *= weight(j, t);
                }
                inner += w;
                false
            });
            total += weight_u * inner / (modulus as f64).powi(s as i32);
        }
        // odometer over smooth-number indices
        let mut i = 0;
        loop {
            if i == r {
                break 'tuples;
            }
            tuple[i] += 1;
            if tuple[i] < smooth.len() {
                break;
            }
            tuple[i] = 0;
            i += 1;
        }
    }

    Ok(TruncatedLeadingConstant {
        c_star: front * total,
        interval_halfwidth: 1.0 / (b0 as f64).sqrt(),
        b0,
        u_bound,
        q0,
        exceptional_conductors: q_rho,
    })
}

/// The per-form scale factor ∏_j (log X)^{-1} ∏_{B₀<p≤X} (1 + ρ_j(p)/p)
/// multiplying C*·vol 𝔎⁺·B^{n+1} in the truncated asymptotic.
pub fn leading_constant_scale_factor(specs: &[FrobMultSpec], b0: u64, x: u64) -> Result<f64> {
    let primes = sieve_primes(x)?;
    let mut out = 1.0f64;
    for spec in specs {
        let mut prod = 0.0f64; // log space
        for &p in primes.iter().filter(|&&p| p > b0) {
            prod += (1.0 + spec.eval_prime_power(p, 1).to_c64().re / p as f64).ln();
        }
        out *= prod.exp() / (x as f64).ln();
    }
    Ok(out)
}
