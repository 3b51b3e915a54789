use std::f64::consts::PI;

use crate::error::{invalid, Result};

fn check_hurst(h: f64) -> Result<()> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("Hurst index {h} must lie in (0, 1)")))
    }
}

/// `½(t^{2H} + s^{2H} − |t−s|^{2H})`. At `H = ½` this is `min(s, t)` exactly.
pub fn fbm_covariance(s: f64, t: f64, hurst: f64) -> Result<f64> {
    check_hurst(hurst)?;
    if s < 0.0 || t < 0.0 {
        return Err(invalid("covariance times must be non-negative"));
    }
    Ok(fbm_cov_unchecked(s, t, hurst))
}

#[inline]
pub(crate) fn fbm_cov_unchecked(s: f64, t: f64, hurst: f64) -> f64 {
    if hurst == 0.5 {
        return s.min(t);
    }
    let h2 = 2.0 * hurst;
    0.5 * (t.powf(h2) + s.powf(h2) - (t - s).abs().powf(h2))
}

/// Normalizing factor of the harmonizable multifractional covariance,
/// `√(Γ(2a+1)Γ(2b+1) sin πa sin πb) / (2Γ(a+b+1) sin(π(a+b)/2))`,
/// equal to `½` on the diagonal.
pub fn mbm_normalizer(a: f64, b: f64) -> f64 {
    let g = libm::tgamma;
    let num = g(2.0 * a + 1.0) * g(2.0 * b + 1.0) * (PI * a).sin() * (PI * b).sin();
    num.sqrt() / (2.0 * g(a + b + 1.0) * (PI * (a + b) / 2.0).sin())
}

/// `D(H(s),H(t))·(t^{H(s)+H(t)} + s^{H(s)+H(t)} − |t−s|^{H(s)+H(t)})`.
pub fn mbm_covariance(s: f64, t: f64, hs: f64, ht: f64) -> Result<f64> {
    check_hurst(hs)?;
    check_hurst(ht)?;
    if s < 0.0 || t < 0.0 {
        return Err(invalid("covariance times must be non-negative"));
    }
    let d = if hs == ht { 0.5 } else { mbm_normalizer(hs, ht) };
    let e = hs + ht;
    Ok(d * (t.powf(e) + s.powf(e) - (t - s).abs().powf(e)))
}

/// Builds the mBm covariance on `times` with per-index terms hoisted.
pub(crate) fn mbm_matrix(times: &[f64], hurst: &[f64], mut set: impl FnMut(usize, usize, f64)) {
    let n = times.len();
    let g = |x: f64| libm::tgamma(x);
    // D(a,b) = √(u_a u_b) / (2Γ(a+b+1) sin(π(a+b)/2)), u_a = Γ(2a+1) sin πa
    let u: Vec<f64> = hurst.iter().map(|&h| g(2.0 * h + 1.0) * (PI * h).sin()).collect();
    for i in 0..n {
        for j in 0..=i {
            let (a, b) = (hurst[i], hurst[j]);
            let e = a + b;
            let d = if a == b {
                0.5
            } else {
                (u[i] * u[j]).sqrt() / (2.0 * g(e + 1.0) * (PI * e / 2.0).sin())
            };
            let (s, t) = (times[i], times[j]);
            set(i, j, d * (t.powf(e) + s.powf(e) - (t - s).abs().powf(e)));
        }
    }
}
