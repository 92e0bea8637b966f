use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::spec::FrobMultSpec;
use super::sums::partial_sum_grid;
use crate::arith::sieve_primes;
use crate::error::{Error, Result};
use crate::frobenian::FrobenianSpec;

/// Γ(x) by the Lanczos approximation (g = 7, 9 coefficients); relative
/// error below 10⁻¹⁰ on the real line away from the poles.
pub fn gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // reflection: Γ(x)Γ(1−x) = π / sin(πx)
        return std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, &c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EulerProductLimit {
    /// ∏_{p≤P} (1 + Σ_k ρ(p^k)/p^k)(1 − 1/p)^m.
    pub value: Complex64,
    pub mean: f64,
    pub truncation: u64,
    /// |value(P) − value(P/2)|, an empirical stabilization gauge.
    pub drift: f64,
    /// Primes where the inner series fails the |ρ(p)| < p growth test and
    /// was summed only to a fixed prime-power cutoff.
    pub divergent_primes: Vec<u64>,
}

/// The Euler-product constant lim_{s→1} (s−1)^m F(s) of the Dirichlet
/// series of ρ, truncated at p ≤ P.
pub fn euler_product_limit(spec: &FrobMultSpec, truncation: u64) -> Result<EulerProductLimit> {
    let mean = spec.base().mean()?;
    let mz = mean.value.to_c64();
    if mz.im.abs() > 1e-9 {
        return Err(Error::domain("euler product limit needs a real mean"));
    }
    let m = mz.re;
    let primes = sieve_primes(truncation)?;
    let mut value = Complex64::new(1.0, 0.0);
    let mut at_half = Complex64::new(1.0, 0.0);
    let mut divergent = Vec::new();
    for &p in &primes {
        let divergent_here = spec.growth() as u64 >= p;
        if divergent_here {
            divergent.push(p);
        }
        let mut inner = Complex64::new(1.0, 0.0);
        let mut pk = p as f64;
        let ratio = spec.growth() as f64 / p as f64;
        for k in 1..=64u32 {
            inner += spec.eval_prime_power(p, k).to_c64() / pk;
            // remaining tail is at most Σ_{j>k} (H/p)^j
            let tail_small =
                !divergent_here && ratio.powi(k as i32 + 1) / (1.0 - ratio) < 1e-18;
            if tail_small || (divergent_here && k >= 40) {
                break;
            }
            pk *= p as f64;
        }
        value *= inner * (1.0 - 1.0 / p as f64).powf(m);
        if p <= truncation / 2 {
            at_half = value;
        }
    }
    Ok(EulerProductLimit {
        value,
        mean: m,
        truncation,
        drift: (value - at_half).norm(),
        divergent_primes: divergent,
    })
}

/// ∏_{p≤x, p∉exclude} (1 + ρ(p)/p) for a frobenian ρ.
pub fn mertens_product(base: &FrobenianSpec, x: u64, exclude: &[u64]) -> Result<f64> {
    let primes = sieve_primes(x)?;
    let mut acc = 1.0f64;
    for &p in &primes {
        if exclude.contains(&p) {
            continue;
        }
        acc *= 1.0 + base.eval_prime(p).to_c64().re / p as f64;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelbergDelangeFit {
    /// Median of S(x)/(x (log x)^{m−1}) over the top half of the grid.
    pub c_est: f64,
    pub mean: f64,
    pub ratios: Vec<(u64, f64)>,
    /// (max − min)/median of the ratios over the top half.
    pub rel_spread: f64,
    /// Sign of the last-minus-first ratio over the top half.
    pub drift_sign: i32,
}

/// Fits the constant c in Σ_{n≤x} ρ(n) ≈ c·x(log x)^{m−1} over an
/// ascending geometric grid with at least 6 points, by median-of-ratios
/// over the top half (robust against the O(1/log x) secondary term).
pub fn selberg_delange_fit(spec: &FrobMultSpec, m: f64, grid: &[u64]) -> Result<SelbergDelangeFit> {
    if m <= 0.0 {
        return Err(Error::domain("selberg_delange_fit needs a positive mean"));
    }
    if grid.len() < 6 {
        return Err(Error::domain("grid needs at least 6 points"));
    }
    let sums = partial_sum_grid(spec, grid)?;
    let ratios: Vec<(u64, f64)> = grid
        .iter()
        .zip(&sums)
        .map(|(&x, s)| {
            let xl = x as f64;
            (x, s.re / (xl * xl.ln().powf(m - 1.0)))
        })
        .collect();
    let top = &ratios[ratios.len() / 2..];
    let mut vals: Vec<f64> = top.iter().map(|&(_, r)| r).collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    let c_est = if vals.len() % 2 == 1 {
        vals[vals.len() / 2]
    } else {
        (vals[vals.len() / 2 - 1] + vals[vals.len() / 2]) / 2.0
    };
    if c_est == 0.0 {
        return Err(Error::domain("partial sums vanish on the fitting grid"));
    }
    let rel_spread = (vals[vals.len() - 1] - vals[0]) / c_est;
    let d = top[top.len() - 1].1 - top[0].1;
    Ok(SelbergDelangeFit {
        c_est,
        mean: m,
        ratios,
        rel_spread,
        drift_sign: if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        },
    })
}

/// A geometric grid of n points from lo to hi (inclusive endpoints).
pub fn geometric_grid(lo: u64, hi: u64, n: usize) -> Vec<u64> {
    assert!(n >= 2 && lo >= 2 && hi > lo);
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<u64> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp().round() as u64)
        .collect();
    out.dedup();
    out
}
