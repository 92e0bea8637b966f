use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

/// A complex scalar that stays exact (Gaussian rational) as long as it can.
///
/// Frobenian data is usually built from rational class-function values and
/// roots of unity of order 1, 2 or 4, so means and character sums can be kept
/// exact. Anything that leaves that world (higher-order roots of unity,
/// numeric overflow) degrades to `Approx`, and the degradation is observable
/// via [`Scalar::is_exact`], so callers can record exactness honestly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Scalar {
    Exact { re: Ratio<i64>, im: Ratio<i64> },
    Approx { re: f64, im: f64 },
}

fn checked_ratio(num: i128, den: i128) -> Option<Ratio<i64>> {
    if den == 0 {
        return None;
    }
    let g = num_integer::gcd(num, den);
    let (num, den) = (num / g, den / g);
    let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
    Some(Ratio::new_raw(
        i64::try_from(num).ok()?,
        i64::try_from(den).ok()?,
    ))
}

fn ratio_add(a: Ratio<i64>, b: Ratio<i64>) -> Option<Ratio<i64>> {
    let num = (*a.numer() as i128) * (*b.denom() as i128) + (*b.numer() as i128) * (*a.denom() as i128);
    let den = (*a.denom() as i128) * (*b.denom() as i128);
    checked_ratio(num, den)
}

fn ratio_mul(a: Ratio<i64>, b: Ratio<i64>) -> Option<Ratio<i64>> {
    let num = (*a.numer() as i128) * (*b.numer() as i128);
    let den = (*a.denom() as i128) * (*b.denom() as i128);
    checked_ratio(num, den)
}

fn ratio_to_f64(a: Ratio<i64>) -> f64 {
    *a.numer() as f64 / *a.denom() as f64
}

impl Scalar {
    pub const ZERO: Scalar = Scalar::Exact {
        re: Ratio::new_raw(0, 1),
        im: Ratio::new_raw(0, 1),
    };
    pub const ONE: Scalar = Scalar::Exact {
        re: Ratio::new_raw(1, 1),
        im: Ratio::new_raw(0, 1),
    };

    pub fn from_int(n: i64) -> Scalar {
        Scalar::Exact {
            re: Ratio::new_raw(n, 1),
            im: Ratio::new_raw(0, 1),
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Scalar {
        assert!(den != 0, "zero denominator");
        Scalar::Exact {
            re: Ratio::new(num, den),
            im: Ratio::new_raw(0, 1),
        }
    }

    /// e^{2πi k/n} when it is Gaussian rational (n | 4 after reduction),
    /// a float otherwise.
    pub fn root_of_unity(k: u32, n: u32) -> Scalar {
        assert!(n > 0);
        let k = k % n;
        let g = num_integer::gcd(k, n);
        let (k, n) = (k / g, n / g);
        match (k, n) {
            (_, 1) => Scalar::ONE,
            (1, 2) => Scalar::from_int(-1),
            (1, 4) => Scalar::Exact {
                re: Ratio::new_raw(0, 1),
                im: Ratio::new_raw(1, 1),
            },
            (3, 4) => Scalar::Exact {
                re: Ratio::new_raw(0, 1),
                im: Ratio::new_raw(-1, 1),
            },
            _ => {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                Scalar::Approx {
                    re: theta.cos(),
                    im: theta.sin(),
                }
            }
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact { .. })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact { re, im } => *re.numer() == 0 && *im.numer() == 0,
            Scalar::Approx { re, im } => *re == 0.0 && *im == 0.0,
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        match *self {
            Scalar::Exact { re, im } => Complex64::new(ratio_to_f64(re), ratio_to_f64(im)),
            Scalar::Approx { re, im } => Complex64::new(re, im),
        }
    }

    /// The exact real value, if this scalar is exact and real.
    pub fn exact_real(&self) -> Option<Ratio<i64>> {
        match self {
            Scalar::Exact { re, im } if *im.numer() == 0 => Some(*re),
            _ => None,
        }
    }

    pub fn conj(&self) -> Scalar {
        match *self {
            Scalar::Exact { re, im } => Scalar::Exact { re, im: -im },
            Scalar::Approx { re, im } => Scalar::Approx { re, im: -im },
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        if let (Scalar::Exact { re: a, im: b }, Scalar::Exact { re: c, im: d }) = (self, other) {
            if let (Some(re), Some(im)) = (ratio_add(*a, *c), ratio_add(*b, *d)) {
                return Scalar::Exact { re, im };
            }
        }
        let (x, y) = (self.to_c64(), other.to_c64());
        Scalar::Approx {
            re: x.re + y.re,
            im: x.im + y.im,
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        if let (Scalar::Exact { re: a, im: b }, Scalar::Exact { re: c, im: d }) = (self, other) {
            let re = ratio_mul(*a, *c).and_then(|ac| {
                ratio_mul(*b, *d).and_then(|bd| ratio_add(ac, -bd))
            });
            let im = ratio_mul(*a, *d).and_then(|ad| {
                ratio_mul(*b, *c).and_then(|bc| ratio_add(ad, bc))
            });
            if let (Some(re), Some(im)) = (re, im) {
                return Scalar::Exact { re, im };
            }
        }
        let p = self.to_c64() * other.to_c64();
        Scalar::Approx { re: p.re, im: p.im }
    }

    pub fn pow(&self, k: u32) -> Scalar {
        let mut acc = Scalar::ONE;
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }
}
