use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fit of samples (B_k, N_k) against the model N ≈ c · B^d / (log B)^Δ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub c_est: f64,
    /// (max − min)/median of the ratio sequence over its top half.
    pub spread: f64,
    /// Least-squares estimate of Δ from log(N/B^d) against log log B;
    /// log log B has range well below 1 at accessible scales, so this is a
    /// coarse check, not a measurement.
    pub delta_est: f64,
    /// Signed change of the ratio across the top half (last − first).
    pub drift: f64,
    /// (B_k, r_k) with r_k = N_k (log B_k)^Δ / B_k^d.
    pub ratios: Vec<(f64, f64)>,
}

/// Fits N_k ≈ c·B_k^d·(log B_k)^{-Δ} on ≥ 6 geometric samples.
pub fn fit_asymptotic(samples: &[(f64, f64)], d: f64, delta: f64) -> Result<FitReport> {
    if samples.len() < 6 {
        return Err(Error::domain("need at least 6 samples to fit"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if sorted.iter().any(|&(b, n)| b <= 2.0 || !n.is_finite()) {
        return Err(Error::domain("samples need B > 2 and finite values"));
    }
    let ratios: Vec<(f64, f64)> = sorted
        .iter()
        .map(|&(b, n)| (b, n * b.ln().powf(delta) / b.powf(d)))
        .collect();
    let top = &ratios[ratios.len() / 2..];
    let mut vals: Vec<f64> = top.iter().map(|&(_, r)| r).collect();
    let drift = vals[vals.len() - 1] - vals[0];
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let c_est = median_of_sorted(&vals);
    let spread = if c_est.abs() > 0.0 {
        (vals[vals.len() - 1] - vals[0]) / c_est.abs()
    } else {
        f64::INFINITY
    };
    // least squares: log(N/B^d) = log c − Δ·log log B
    let points: Vec<(f64, f64)> = sorted
        .iter()
        .filter(|&&(_, n)| n > 0.0)
        .map(|&(b, n)| (b.ln().ln(), (n / b.powf(d)).ln()))
        .collect();
    let delta_est = if points.len() >= 2 {
        -least_squares_slope(&points)
    } else {
        f64::NAN
    };
    Ok(FitReport {
        c_est,
        spread,
        delta_est,
        drift,
        ratios,
    })
}

fn median_of_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
