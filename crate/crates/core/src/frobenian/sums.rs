use serde::{Deserialize, Serialize};

use super::spec::FrobenianSpec;
use crate::arith::sieve_primes;
use crate::error::{Error, Result};

/// The four classical prime-sum sanity checks for a frobenian ρ of mean m:
///
/// * `Linear`      — Σ_{p≤x} ρ(p) against m·Li(x);
/// * `Reciprocal`  — Σ_{p≤x} ρ(p)/p against m·log log x + C;
/// * `Weighted`    — Σ_{p≤x} ρ(p) log p against m·x;
/// * `EulerProduct`— ∏_{p≤x} (1 + ρ(p)/p) against C′·(log x)^m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrimeSumVariant {
    Linear,
    Reciprocal,
    Weighted,
    EulerProduct,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrimeSumReport {
    pub variant: PrimeSumVariant,
    pub x: u64,
    /// Mean of ρ used for the prediction (real part).
    pub mean: f64,
    pub observed: f64,
    pub predicted: f64,
    /// Relative deviation for `Linear`/`Weighted`; change of the fitted
    /// constant between x/2 and x for `Reciprocal`/`EulerProduct`.
    pub deviation: f64,
    /// For `Reciprocal` and `EulerProduct`, the constant fitted at x/2 and
    /// at x; their closeness certifies stabilization.
    pub constant_estimates: Option<(f64, f64)>,
}

/// Logarithmic integral Li(x) = ∫_2^x dt/log t, by composite Simpson in
/// u = log t (integrand e^u/u is smooth and slowly varying).
pub fn li(x: f64) -> f64 {
    if x <= 2.0 {
        return 0.0;
    }
    let (a, b) = (2.0f64.ln(), x.ln());
    let n = 4096usize; // even
    let h = (b - a) / n as f64;
    let f = |u: f64| u.exp() / u;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Runs one of the four sanity checks at cutoff x, using the exceptional
/// values at primes of S as the honest values of ρ there.
pub fn prime_sum_check(
    spec: &FrobenianSpec,
    x: u64,
    variant: PrimeSumVariant,
) -> Result<PrimeSumReport> {
    if x < 100 {
        return Err(Error::domain("cutoff too small for a meaningful check"));
    }
    let mean = spec.mean()?;
    let mz = mean.value.to_c64();
    if mz.im.abs() > 1e-9 {
        return Err(Error::domain("prime sum checks need a real mean"));
    }
    let m = mz.re;
    if variant != PrimeSumVariant::Linear && m == 0.0 {
        return Err(Error::domain("prime sum checks need a nonzero mean"));
    }
    let primes = sieve_primes(x)?;
    let half = x / 2;

    // accumulate, recording the state when p crosses x/2
    let mut acc = 0.0f64; // sum, or log of product
    let mut acc_half = 0.0f64;
    let mut c = 0.0f64; // Kahan compensation
    for &p in &primes {
        let rho = spec.eval_prime(p).to_c64().re;
        let term = match variant {
            PrimeSumVariant::Linear => rho,
            PrimeSumVariant::Reciprocal => rho / p as f64,
            PrimeSumVariant::Weighted => rho * (p as f64).ln(),
            PrimeSumVariant::EulerProduct => {
                let f = 1.0 + rho / p as f64;
                if f <= 0.0 {
                    return Err(Error::domain("euler factor vanishes or is negative"));
                }
                f.ln()
            }
        };
        let y = term - c;
        let t = acc + y;
        c = (t - acc) - y;
        acc = t;
        if p <= half {
            acc_half = acc;
        }
    }

    let lx = (x as f64).ln();
    let lh = (half as f64).ln();
    let report = match variant {
        PrimeSumVariant::Linear => {
            let predicted = m * li(x as f64);
            let denom = if predicted != 0.0 { predicted.abs() } else { 1.0 };
            PrimeSumReport {
                variant,
                x,
                mean: m,
                observed: acc,
                predicted,
                deviation: (acc - predicted).abs() / denom,
                constant_estimates: None,
            }
        }
        PrimeSumVariant::Weighted => {
            let predicted = m * x as f64;
            PrimeSumReport {
                variant,
                x,
                mean: m,
                observed: acc,
                predicted,
                deviation: (acc - predicted).abs() / predicted.abs(),
                constant_estimates: None,
            }
        }
        PrimeSumVariant::Reciprocal => {
            let c_half = acc_half - m * lh.ln();
            let c_full = acc - m * lx.ln();
            PrimeSumReport {
                variant,
                x,
                mean: m,
                observed: acc,
                predicted: m * lx.ln() + c_full,
                deviation: (c_full - c_half).abs(),
                constant_estimates: Some((c_half, c_full)),
            }
        }
        PrimeSumVariant::EulerProduct => {
            let c_half = (acc_half - m * lh.ln()).exp();
            let c_full = (acc - m * lx.ln()).exp();
            PrimeSumReport {
                variant,
                x,
                mean: m,
                observed: acc.exp(),
                predicted: c_full * lx.powf(m),
                deviation: (c_full - c_half).abs() / c_full.abs(),
                constant_estimates: Some((c_half, c_full)),
            }
        }
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::Scalar;
    use crate::frobenian::character::DirichletCharacter;

    #[test]
    fn li_values() {
        // Li(10^6) ≈ 78626.5 (within 0.1 of tables)
        let v = li(1e6);
        assert!((v - 78626.5).abs() < 1.0, "Li(1e6) = {v}");
        assert!((li(1e4) - 1245.09).abs() < 0.5);
        assert_eq!(li(2.0), 0.0);
    }

    #[test]
    fn constant_function_tracks_prime_counting() {
        // ρ ≡ 1: Σ ρ(p) = π(x), compare against Li(x)
        let rho = FrobenianSpec::character_combo(
            vec![(DirichletCharacter::trivial(), Scalar::ONE)],
            vec![],
        )
        .unwrap();
        let r = prime_sum_check(&rho, 1_000_000, PrimeSumVariant::Linear).unwrap();
        assert_eq!(r.observed, 78498.0); // π(10^6)
        assert!(r.deviation < 0.005, "deviation {}", r.deviation);

        let r = prime_sum_check(&rho, 1_000_000, PrimeSumVariant::Weighted).unwrap();
        assert!(r.deviation < 0.01, "deviation {}", r.deviation);

        // Mertens: Σ 1/p - log log x → M ≈ 0.2615
        let r = prime_sum_check(&rho, 1_000_000, PrimeSumVariant::Reciprocal).unwrap();
        let (c1, c2) = r.constant_estimates.unwrap();
        assert!((c2 - 0.2615).abs() < 0.01, "Mertens constant estimate {c2}");
        assert!((c1 - c2).abs() < 0.005);

        // ∏ (1 + 1/p) ~ C (log x): C = 6e^γ/π² ≈ 1.0827 (1/ζ(2) · e^γ)
        let r = prime_sum_check(&rho, 1_000_000, PrimeSumVariant::EulerProduct).unwrap();
        let (_, c2) = r.constant_estimates.unwrap();
        let expected = 6.0 * (0.5772156649f64).exp() / (std::f64::consts::PI.powi(2));
        assert!((c2 - expected).abs() < 0.01, "got {c2}, expected {expected}");
    }

    #[test]
    fn zero_mean_rejected_for_log_variants() {
        let chi = DirichletCharacter::from_discriminant(-4).unwrap();
        let rho = FrobenianSpec::character_combo(
            vec![(chi, Scalar::ONE)],
            vec![(2, Scalar::ZERO)],
        )
        .unwrap();
        assert!(prime_sum_check(&rho, 10_000, PrimeSumVariant::Reciprocal).is_err());
        // the linear variant is fine with mean 0: cancellation check
        let r = prime_sum_check(&rho, 100_000, PrimeSumVariant::Linear).unwrap();
        assert!(r.observed.abs() < 200.0, "character sum over primes {}", r.observed);
    }
}
