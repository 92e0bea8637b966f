use serde::{Deserialize, Serialize};

use crate::arith::kronecker_symbol;
use crate::error::{Error, Result};
use crate::value::Scalar;

/// A Dirichlet character mod q, stored as a table of root-of-unity
/// exponents: `exps[a] = Some(k)` means χ(a) = e^{2πi·k/order}, `None`
/// means gcd(a, q) > 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirichletCharacter {
    modulus: u64,
    order: u32,
    exps: Vec<Option<u32>>,
    conductor: u64,
    primitive: bool,
}

impl DirichletCharacter {
    /// The trivial character (modulus 1, identically 1).
    pub fn trivial() -> DirichletCharacter {
        DirichletCharacter {
            modulus: 1,
            order: 1,
            exps: vec![Some(0)],
            conductor: 1,
            primitive: true,
        }
    }

    /// The real character n ↦ Kronecker(d, n) for a fundamental
    /// discriminant d (d ≡ 1 mod 4 or d ≡ 8, 12 mod 16), taken mod |d|.
    pub fn from_discriminant(d: i64) -> Result<DirichletCharacter> {
        if d == 0 {
            return Err(Error::domain("discriminant must be nonzero"));
        }
        if d == 1 {
            return Ok(DirichletCharacter::trivial());
        }
        let m4 = d.rem_euclid(4);
        if m4 != 0 && m4 != 1 {
            return Err(Error::domain("not a discriminant (need d ≡ 0,1 mod 4)"));
        }
        let q = d.unsigned_abs();
        let exps = (0..q)
            .map(|a| match kronecker_symbol(d as i128, a as i128) {
                1 => Some(0),
                -1 => Some(1),
                _ => None,
            })
            .collect::<Vec<_>>();
        let order = 2;
        let conductor = conductor_of(q, order, &exps);
        let primitive = conductor == q;
        Ok(DirichletCharacter {
            modulus: q,
            order,
            exps,
            conductor,
            primitive,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// True iff χ is the principal character (1 on units), of any modulus.
    pub fn is_principal(&self) -> bool {
        self.conductor == 1
    }

    /// Exponent k with χ(n) = e^{2πi·k/order}, or None on non-units.
    pub fn exponent(&self, n: i128) -> Option<u32> {
        let a = n.rem_euclid(self.modulus as i128) as usize;
        self.exps[a]
    }

    pub fn eval(&self, n: i128) -> Scalar {
        match self.exponent(n) {
            None => Scalar::ZERO,
            Some(k) => Scalar::root_of_unity(k, self.order),
        }
    }

    /// True iff χ(n) = 1.
    pub fn is_one_at(&self, n: i128) -> bool {
        self.exponent(n) == Some(0)
    }

    pub fn conj(&self) -> DirichletCharacter {
        let order = self.order;
        DirichletCharacter {
            modulus: self.modulus,
            order,
            exps: self
                .exps
                .iter()
                .map(|e| e.map(|k| (order - k % order) % order))
                .collect(),
            conductor: self.conductor,
            primitive: self.primitive,
        }
    }

    /// Pointwise product, defined modulo lcm of the moduli.
    pub fn multiply(&self, other: &DirichletCharacter) -> DirichletCharacter {
        let m = num_integer::lcm(self.modulus, other.modulus);
        let n = num_integer::lcm(self.order, other.order);
        let exps = (0..m)
            .map(|a| {
                let k1 = self.exps[(a % self.modulus) as usize]?;
                let k2 = other.exps[(a % other.modulus) as usize]?;
                Some((k1 * (n / self.order) + k2 * (n / other.order)) % n)
            })
            .collect::<Vec<_>>();
        let conductor = conductor_of(m, n, &exps);
        DirichletCharacter {
            modulus: m,
            order: n,
            exps,
            conductor,
            primitive: conductor == m,
        }
    }

    /// Same character values on all integers (compared via the lcm modulus).
    pub fn same_values(&self, other: &DirichletCharacter) -> bool {
        let m = num_integer::lcm(self.modulus, other.modulus);
        let n = num_integer::lcm(self.order, other.order);
        (0..m).all(|a| {
            let k1 = self.exps[(a % self.modulus) as usize];
            let k2 = other.exps[(a % other.modulus) as usize];
            match (k1, k2) {
                (None, None) => true,
                (Some(k1), Some(k2)) => k1 * (n / self.order) == k2 * (n / other.order),
                _ => false,
            }
        })
    }
}

/// Smallest d | q such that the character factors through (ℤ/d)^*.
fn conductor_of(q: u64, _order: u32, exps: &[Option<u32>]) -> u64 {
    'outer: for d in divisors(q) {
        for a in 1..q {
            if a % d == 1 % d && exps[a as usize].is_some() && exps[a as usize] != Some(0) {
                continue 'outer;
            }
        }
        return d;
    }
    q
}

fn divisors(q: u64) -> Vec<u64> {
    let mut ds: Vec<u64> = (1..=q).filter(|d| q % d == 0).collect();
    ds.sort_unstable();
    ds
}

fn powmod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * a as u128 % m as u128) as u64;
        }
        a = (a as u128 * a as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

fn primitive_root_mod_p(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let mut fac = Vec::new();
    crate::arith::factor_u64(p - 1, &mut fac);
    'g: for g in 2..p {
        for &(qf, _) in &fac {
            if powmod(g, (p - 1) / qf, p) == 1 {
                continue 'g;
            }
        }
        return g;
    }
    unreachable!("every prime has a primitive root")
}

/// Generators (with orders) of (ℤ/qℤ)^*, each ≡ 1 modulo the other prime
/// power components.
fn unit_group_generators(q: u64) -> Vec<(u64, u32)> {
    let mut fac = Vec::new();
    crate::arith::factor_u64(q, &mut fac);
    let mut gens = Vec::new();
    for &(p, e) in &fac {
        let pe = p.pow(e);
        let local: Vec<(u64, u32)> = if p == 2 {
            match e {
                1 => vec![],
                2 => vec![(3, 2)],
                _ => vec![(pe - 1, 2), (3, 1u32 << (e - 2))],
            }
        } else {
            let mut g = primitive_root_mod_p(p);
            if e > 1 && powmod(g, p - 1, p * p) == 1 {
                g += p;
            }
            let phi = pe / p * (p - 1);
            vec![(g % pe, phi as u32)]
        };
        // CRT-lift each local generator to be 1 mod q/pe
        let rest = q / pe;
        for (g, ord) in local {
            let lifted = crt_pair(g, pe, 1, rest);
            gens.push((lifted, ord));
        }
    }
    gens
}

fn crt_pair(a: u64, m: u64, b: u64, n: u64) -> u64 {
    // gcd(m, n) = 1
    if n == 1 {
        return a % m;
    }
    if m == 1 {
        return b % n;
    }
    let (mut x, q) = (a as i128, (m as i128) * (n as i128));
    let m_inv = mod_inv_i128(m as i128, n as i128);
    let t = ((b as i128 - x).rem_euclid(n as i128) * m_inv).rem_euclid(n as i128);
    x += m as i128 * t;
    x.rem_euclid(q) as u64
}

fn mod_inv_i128(a: i128, m: i128) -> i128 {
    let (mut old_r, mut r) = (a.rem_euclid(m), m);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    old_s.rem_euclid(m)
}

/// All φ(q) Dirichlet characters mod q.
pub fn all_characters(q: u64) -> Vec<DirichletCharacter> {
    assert!(q >= 1);
    if q == 1 {
        return vec![DirichletCharacter::trivial()];
    }
    let gens = unit_group_generators(q);
    let orders: Vec<u32> = gens.iter().map(|&(_, o)| o).collect();
    let n = orders.iter().fold(1u32, |acc, &o| num_integer::lcm(acc, o));

    // discrete-log table: residue -> exponent tuple
    let mut dlog: Vec<Option<Vec<u32>>> = vec![None; q as usize];
    let mut tuple = vec![0u32; gens.len()];
    loop {
        let mut a = 1u64;
        for (i, &(g, _)) in gens.iter().enumerate() {
            a = (a as u128 * powmod(g, tuple[i] as u64, q) as u128 % q as u128) as u64;
        }
        debug_assert!(dlog[a as usize].is_none(), "unit group enumeration collision");
        dlog[a as usize] = Some(tuple.clone());
        // odometer
        let mut i = 0;
        loop {
            if i == gens.len() {
                // full cycle complete
                tuple.clear();
                break;
            }
            tuple[i] += 1;
            if tuple[i] < orders[i] {
                break;
            }
            tuple[i] = 0;
            i += 1;
        }
        if tuple.is_empty() {
            break;
        }
    }

    let mut chars = Vec::new();
    let mut cs = vec![0u32; gens.len()];
    loop {
        let exps: Vec<Option<u32>> = (0..q)
            .map(|a| {
                dlog[a as usize].as_ref().map(|t| {
                    let mut k = 0u64;
                    for i in 0..gens.len() {
                        k += cs[i] as u64 * t[i] as u64 * (n / orders[i]) as u64;
                    }
                    (k % n as u64) as u32
                })
            })
            .collect();
        let conductor = conductor_of(q, n, &exps);
        chars.push(DirichletCharacter {
            modulus: q,
            order: n,
            exps,
            conductor,
            primitive: conductor == q,
        });
        let mut i = 0;
        loop {
            if i == cs.len() {
                return chars;
            }
            cs[i] += 1;
            if cs[i] < orders[i] {
                break;
            }
            cs[i] = 0;
            i += 1;
        }
        if cs.iter().all(|&c| c == 0) {
            return chars;
        }
    }
}

/// All primitive characters of conductor ≤ bound (including the trivial
/// character of conductor 1).
pub fn primitive_characters_up_to(bound: u64) -> Vec<DirichletCharacter> {
    let mut out = Vec::new();
    for q in 1..=bound {
        out.extend(all_characters(q).into_iter().filter(|c| c.is_primitive()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi(q: u64) -> u64 {
        (1..=q).filter(|&a| num_integer::gcd(a, q) == 1).count() as u64
    }

    #[test]
    fn character_counts_and_orthogonality() {
        for q in [1u64, 2, 3, 4, 5, 8, 12, 15, 16, 24] {
            let chars = all_characters(q);
            assert_eq!(chars.len() as u64, phi(q), "q={q}");
            for c in &chars {
                // complete multiplicativity mod q
                for a in 0..q as i128 {
                    for b in 0..q as i128 {
                        let lhs = c.eval(a).mul(&c.eval(b));
                        let rhs = c.eval(a * b);
                        assert_eq!(lhs.to_c64(), rhs.to_c64(), "q={q} a={a} b={b}");
                    }
                }
                // orthogonality: sum over residues is 0 unless principal
                let s = (0..q as i128).fold(Scalar::ZERO, |acc, a| acc.add(&c.eval(a)));
                if c.is_principal() {
                    assert_eq!(s.exact_real().unwrap(), num_rational::Ratio::new(phi(q) as i64, 1));
                } else {
                    let z = s.to_c64();
                    assert!(z.norm() < 1e-9, "q={q}");
                }
            }
        }
    }

    #[test]
    fn kronecker_characters_match_enumeration() {
        // χ_{-4} and χ_8 appear among the primitive characters
        let chi_m4 = DirichletCharacter::from_discriminant(-4).unwrap();
        assert!(chi_m4.is_primitive());
        assert_eq!(chi_m4.conductor(), 4);
        assert!(chi_m4.is_one_at(1) && !chi_m4.is_one_at(3));

        let chi_8 = DirichletCharacter::from_discriminant(8).unwrap();
        assert!(chi_8.is_primitive());
        assert_eq!(chi_8.conductor(), 8);
        assert!(chi_8.is_one_at(7) && chi_8.is_one_at(1));
        assert!(!chi_8.is_one_at(3) && !chi_8.is_one_at(5));

        let prim8 = all_characters(8);
        assert!(prim8.iter().any(|c| c.same_values(&chi_8)));
    }

    #[test]
    fn primitive_counts_small_conductors() {
        // number of primitive characters mod q for q = 1..12
        let expected = [1usize, 0, 1, 1, 3, 0, 5, 2, 4, 0, 9, 1];
        for (i, &e) in expected.iter().enumerate() {
            let q = (i + 1) as u64;
            let n = all_characters(q).iter().filter(|c| c.is_primitive()).count();
            assert_eq!(n, e, "q={q}");
        }
    }

    #[test]
    fn multiplication_and_conjugation() {
        let chi_m4 = DirichletCharacter::from_discriminant(-4).unwrap();
        let chi_8 = DirichletCharacter::from_discriminant(8).unwrap();
        let prod = chi_m4.multiply(&chi_8);
        assert_eq!(prod.modulus(), 8);
        // χ_{-4}·χ_8 = χ_{-8}
        let chi_m8 = DirichletCharacter::from_discriminant(-8).unwrap();
        assert!(prod.same_values(&chi_m8));
        // real characters are self-conjugate
        assert!(chi_8.conj().same_values(&chi_8));
        // χ·χ̄ is principal
        for c in all_characters(5) {
            assert!(c.multiply(&c.conj()).is_principal());
        }
    }
}
