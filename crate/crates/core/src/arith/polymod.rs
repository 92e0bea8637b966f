use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multiset of irreducible-factor degrees of a monic polynomial mod p, or
/// `ramified` when the reduction has a repeated factor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplittingPattern {
    /// Sorted ascending; empty iff ramified.
    pub degrees: Vec<u32>,
    pub ramified: bool,
}

impl SplittingPattern {
    pub fn ramified() -> SplittingPattern {
        SplittingPattern {
            degrees: Vec::new(),
            ramified: true,
        }
    }

    pub fn of(mut degrees: Vec<u32>) -> SplittingPattern {
        degrees.sort_unstable();
        SplittingPattern {
            degrees,
            ramified: false,
        }
    }
}

/// Dense polynomial over 𝔽_p, coefficients ascending, no trailing zeros.
#[derive(Debug, Clone, PartialEq)]
struct PolyP {
    c: Vec<u64>,
    p: u64,
}

impl PolyP {
    fn new(mut c: Vec<u64>, p: u64) -> PolyP {
        for x in &mut c {
            *x %= p;
        }
        while c.last() == Some(&0) {
            c.pop();
        }
        PolyP { c, p }
    }

    fn zero(p: u64) -> PolyP {
        PolyP { c: vec![], p }
    }

    fn x(p: u64) -> PolyP {
        PolyP::new(vec![0, 1], p)
    }

    fn deg(&self) -> Option<usize> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.c.len() - 1)
        }
    }

    fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    fn monic(&self) -> PolyP {
        match self.c.last() {
            None => self.clone(),
            Some(&lc) => {
                let inv = mod_inverse(lc, self.p);
                PolyP::new(
                    self.c.iter().map(|&a| mulmod(a, inv, self.p)).collect(),
                    self.p,
                )
            }
        }
    }

    fn sub(&self, other: &PolyP) -> PolyP {
        let p = self.p;
        let n = self.c.len().max(other.c.len());
        let mut c = vec![0u64; n];
        for i in 0..n {
            let a = self.c.get(i).copied().unwrap_or(0);
            let b = other.c.get(i).copied().unwrap_or(0);
            c[i] = (a + p - b) % p;
        }
        PolyP::new(c, p)
    }

    fn mul(&self, other: &PolyP) -> PolyP {
        let p = self.p;
        if self.c.is_empty() || other.c.is_empty() {
            return PolyP::zero(p);
        }
        let mut c = vec![0u64; self.c.len() + other.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.c.iter().enumerate() {
                c[i + j] = (c[i + j] + mulmod(a, b, p)) % p;
            }
        }
        PolyP::new(c, p)
    }

    /// Remainder of self modulo divisor (divisor nonzero).
    fn rem(&self, divisor: &PolyP) -> PolyP {
        let p = self.p;
        let dd = divisor.deg().expect("division by zero polynomial");
        let lc_inv = mod_inverse(*divisor.c.last().unwrap(), p);
        let mut r = self.c.clone();
        while r.len() > dd {
            let k = r.len() - 1;
            let coef = mulmod(r[k], lc_inv, p);
            if coef != 0 {
                let shift = k - dd;
                for (i, &dc) in divisor.c.iter().enumerate() {
                    let t = mulmod(coef, dc, p);
                    r[shift + i] = (r[shift + i] + p - t) % p;
                }
            }
            r.pop();
            while r.last() == Some(&0) {
                r.pop();
            }
            if r.len() <= dd {
                break;
            }
        }
        PolyP::new(r, p)
    }

    fn gcd(&self, other: &PolyP) -> PolyP {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.c.is_empty() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    fn derivative(&self) -> PolyP {
        let p = self.p;
        let c = self
            .c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &a)| mulmod(a, (i as u64) % p, p))
            .collect();
        PolyP::new(c, p)
    }

    /// self^e mod m.
    fn powmod(&self, mut e: u64, m: &PolyP) -> PolyP {
        let mut base = self.rem(m);
        let mut acc = PolyP::new(vec![1], self.p);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
            e >>= 1;
        }
        acc
    }
}

#[inline]
fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // p prime, a not ≡ 0
    let mut r = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, base, p);
        }
        base = mulmod(base, base, p);
        e >>= 1;
    }
    r
}

/// Degrees of the irreducible factors of a monic integer polynomial mod p,
/// by distinct-degree factorization; ramified when gcd(f, f′) mod p is
/// nonconstant (no degrees are attempted in that case).
pub fn splitting_pattern(f: &[i64], p: u64) -> Result<SplittingPattern> {
    if f.len() < 2 {
        return Err(Error::domain("splitting_pattern needs degree >= 1"));
    }
    if *f.last().unwrap() != 1 {
        return Err(Error::domain("splitting_pattern needs a monic polynomial"));
    }
    let fp = PolyP::new(
        f.iter().map(|&a| a.rem_euclid(p as i64) as u64).collect(),
        p,
    );
    // monic over ℤ, so no degree drop mod p
    debug_assert_eq!(fp.deg(), Some(f.len() - 1));
    let fprime = fp.derivative();
    if fprime.c.is_empty() || !fp.gcd(&fprime).is_constant() {
        return Ok(SplittingPattern::ramified());
    }
    let mut degrees = Vec::new();
    let mut g = fp.monic();
    let mut d = 1u32;
    while let Some(deg_g) = g.deg() {
        if deg_g == 0 {
            break;
        }
        if 2 * (d as usize) > deg_g {
            degrees.push(deg_g as u32);
            break;
        }
        // x^(p^d) mod g, by d successive p-th powers
        let mut xq = PolyP::x(p).rem(&g);
        for _ in 0..d {
            xq = xq.powmod(p, &g);
        }
        let h = xq.sub(&PolyP::x(p).rem(&g));
        let gd = h.gcd(&g);
        if let Some(deg_gd) = gd.deg() {
            if deg_gd > 0 {
                debug_assert_eq!(deg_gd % d as usize, 0);
                for _ in 0..(deg_gd / d as usize) {
                    degrees.push(d);
                }
                g = divide_exact(&g, &gd);
            }
        }
        d += 1;
    }
    Ok(SplittingPattern::of(degrees))
}

fn divide_exact(num: &PolyP, den: &PolyP) -> PolyP {
    // num = q·den exactly; synthetic long division keeping the quotient
    let p = num.p;
    let dd = den.deg().unwrap();
    let lc_inv = mod_inverse(*den.c.last().unwrap(), p);
    let mut r = num.c.clone();
    let mut q = vec![0u64; r.len().saturating_sub(dd)];
    while r.len() > dd {
        let k = r.len() - 1;
        let coef = mulmod(r[k], lc_inv, p);
        let shift = k - dd;
        q[shift] = coef;
        if coef != 0 {
            for (i, &dc) in den.c.iter().enumerate() {
                let t = mulmod(coef, dc, p);
                r[shift + i] = (r[shift + i] + p - t) % p;
            }
        }
        r.pop();
        while r.last() == Some(&0) {
            r.pop();
        }
    }
    debug_assert!(r.is_empty(), "division was not exact");
    PolyP::new(q, p)
}
