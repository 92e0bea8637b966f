use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::spec::FrobMultSpec;
use crate::arith::sieve_primes;
use crate::error::{Error, Result};

/// Default slab length for the segmented factorization sweep.
pub const DEFAULT_SEGMENT: usize = 1 << 20;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProgressionSum {
    pub x: u64,
    pub q: u64,
    pub a: u64,
    pub value: Complex64,
    /// When set, `value` has been multiplied by q/x.
    pub normalized: bool,
}

impl ProgressionSum {
    pub fn normalized(&self) -> ProgressionSum {
        if self.normalized {
            return *self;
        }
        ProgressionSum {
            value: self.value * (self.q as f64 / self.x as f64),
            normalized: true,
            ..*self
        }
    }
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Visits (n, ρ(n)) for every 1 ≤ n ≤ x, factoring a whole slab at a time
/// by sieving with the primes ≤ √x; the leftover cofactor of each n is
/// either 1 or a single large prime. No table over [1, x] is ever held.
fn sweep<F: FnMut(u64, Complex64)>(
    spec: &FrobMultSpec,
    x: u64,
    segment: usize,
    mut visit: F,
) -> Result<()> {
    if x == 0 {
        return Ok(());
    }
    let segment = segment.max(64);
    let small = sieve_primes(isqrt(x))?;
    // prime-power values for the sieving primes
    let mut pk_vals: Vec<Vec<Complex64>> = Vec::with_capacity(small.len());
    for &p in &small {
        let mut row = vec![Complex64::new(1.0, 0.0)];
        let mut pk = p as u128;
        let mut k = 1u32;
        while pk <= x as u128 {
            row.push(spec.eval_prime_power(p, k).to_c64());
            pk *= p as u128;
            k += 1;
        }
        pk_vals.push(row);
    }
    let mut large_memo: HashMap<u64, Complex64> = HashMap::new();

    let mut rem = vec![0u64; segment];
    let mut val = vec![Complex64::new(0.0, 0.0); segment];
    let mut lo = 1u64;
    while lo <= x {
        let hi = (lo + segment as u64 - 1).min(x); // inclusive
        let len = (hi - lo + 1) as usize;
        for i in 0..len {
            rem[i] = lo + i as u64;
            val[i] = Complex64::new(1.0, 0.0);
        }
        for (pi, &p) in small.iter().enumerate() {
            if p > hi {
                break;
            }
            let first = lo.div_ceil(p) * p;
            let mut n = first;
            while n <= hi {
                let i = (n - lo) as usize;
                let mut k = 0usize;
                while rem[i] % p == 0 {
                    rem[i] /= p;
                    k += 1;
                }
                val[i] *= pk_vals[pi][k];
                n += p;
            }
        }
        for i in 0..len {
            if rem[i] > 1 {
                let p = rem[i];
                let v = *large_memo
                    .entry(p)
                    .or_insert_with(|| spec.eval_prime_power(p, 1).to_c64());
                val[i] *= v;
            }
            visit(lo + i as u64, val[i]);
        }
        lo = hi + 1;
    }
    Ok(())
}

fn kahan(acc: &mut Complex64, comp: &mut Complex64, term: Complex64) {
    let y = term - *comp;
    let t = *acc + y;
    *comp = (t - *acc) - y;
    *acc = t;
}

/// Σ_{n≤x} ρ(n).
pub fn partial_sum(spec: &FrobMultSpec, x: u64) -> Result<Complex64> {
    partial_sum_with_segment(spec, x, DEFAULT_SEGMENT)
}

pub fn partial_sum_with_segment(spec: &FrobMultSpec, x: u64, segment: usize) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    sweep(spec, x, segment, |_, v| kahan(&mut acc, &mut comp, v))?;
    Ok(acc)
}

/// Σ_{n≤x_i} ρ(n) at each cutoff of an ascending grid, in one sweep.
pub fn partial_sum_grid(spec: &FrobMultSpec, grid: &[u64]) -> Result<Vec<Complex64>> {
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("grid must be strictly ascending"));
    }
    let Some(&max) = grid.last() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    let mut next = 0usize;
    sweep(spec, max, DEFAULT_SEGMENT, |n, v| {
        while next < grid.len() && n > grid[next] {
            out.push(acc);
            next += 1;
        }
        kahan(&mut acc, &mut comp, v);
    })?;
    while next < grid.len() {
        out.push(acc);
        next += 1;
    }
    Ok(out)
}

/// Σ_{n≤x, n≡a mod q} ρ(n), unnormalized.
pub fn partial_sum_progression(
    spec: &FrobMultSpec,
    x: u64,
    q: u64,
    a: u64,
) -> Result<ProgressionSum> {
    if q == 0 || a >= q {
        return Err(Error::domain("need q ≥ 1 and 0 ≤ a < q"));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    sweep(spec, x, DEFAULT_SEGMENT, |n, v| {
        if n % q == a {
            kahan(&mut acc, &mut comp, v);
        }
    })?;
    Ok(ProgressionSum {
        x,
        q,
        a,
        value: acc,
        normalized: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplicative::spec::test_specs::*;

    #[test]
    fn small_partial_sums() {
        assert_eq!(partial_sum(&tau(), 10).unwrap().re, 27.0);
        assert_eq!(partial_sum(&two_squares(), 10).unwrap().re, 7.0); // {1,2,4,5,8,9,10}
        assert_eq!(partial_sum(&one(), 1000).unwrap().re, 1000.0);
        assert_eq!(partial_sum(&tau(), 0).unwrap().re, 0.0);
    }

    #[test]
    fn divisor_sum_matches_hyperbola_identity() {
        // Σ_{n≤x} τ(n) = Σ_{d≤x} ⌊x/d⌋, exact
        for x in [100u64, 12345, 100_000] {
            let oracle: u64 = (1..=x).map(|d| x / d).sum();
            let got = partial_sum(&tau(), x).unwrap().re;
            assert_eq!(got, oracle as f64, "x={x}");
        }
    }

    #[test]
    fn squarefree_count_matches_direct_sieve() {
        let x = 50_000usize;
        let mut sf = vec![true; x + 1];
        let mut d = 2usize;
        while d * d <= x {
            let mut m = d * d;
            while m <= x {
                sf[m] = false;
                m += d * d;
            }
            d += 1;
        }
        let oracle = (1..=x).filter(|&n| sf[n]).count() as f64;
        assert_eq!(partial_sum(&mu_squared(), x as u64).unwrap().re, oracle);
    }

    #[test]
    fn progression_examples() {
        let p = partial_sum_progression(&tau(), 10, 2, 1).unwrap();
        assert_eq!(p.value.re, 10.0); // n ∈ {1,3,5,7,9}: 1+2+2+2+3
        let whole = partial_sum_progression(&tau(), 1000, 1, 0).unwrap();
        assert_eq!(whole.value.re, partial_sum(&tau(), 1000).unwrap().re);
        // no sum of two squares is ≡ 3 mod 4
        let none = partial_sum_progression(&two_squares(), 100, 4, 3).unwrap();
        assert_eq!(none.value.re, 0.0);
        // normalization multiplies by q/x
        let n = p.normalized();
        assert!(n.normalized);
        assert_eq!(n.value.re, 10.0 * 2.0 / 10.0);
    }

    #[test]
    fn progressions_partition_the_total() {
        let x = 10_000u64;
        for (name, spec) in library() {
            let total = partial_sum(&spec, x).unwrap().re;
            for q in [2u64, 3, 7, 30] {
                let sum: f64 = (0..q)
                    .map(|a| partial_sum_progression(&spec, x, q, a).unwrap().value.re)
                    .sum();
                assert_eq!(sum, total, "{name} q={q}");
            }
        }
    }

    #[test]
    fn segment_size_does_not_change_integer_sums() {
        for (name, spec) in library() {
            let reference = partial_sum_with_segment(&spec, 30_000, DEFAULT_SEGMENT).unwrap();
            for seg in [64usize, 1 << 10, 1 << 14] {
                let v = partial_sum_with_segment(&spec, 30_000, seg).unwrap();
                assert_eq!(v.re.to_bits(), reference.re.to_bits(), "{name} seg={seg}");
                assert_eq!(v.im.to_bits(), reference.im.to_bits(), "{name} seg={seg}");
            }
        }
    }

    #[test]
    fn grid_matches_individual_sums() {
        let grid = [10u64, 100, 1000, 10_000];
        let got = partial_sum_grid(&tau(), &grid).unwrap();
        for (i, &x) in grid.iter().enumerate() {
            assert_eq!(got[i].re, partial_sum(&tau(), x).unwrap().re, "x={x}");
        }
        assert!(partial_sum_grid(&tau(), &[5, 5]).is_err());
    }
}
