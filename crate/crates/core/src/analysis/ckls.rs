use crate::error::{invalid, Error, Result};
use crate::model::ckls_transform;
use crate::noise::NoisePath;
use crate::solver::SimulatedPath;

/// Sup over grid points of the gap in the integral equation satisfied by
/// `X = Y^{1+γ}`:
///
/// `X(t) = X(0) + (1+γ)∫(κ₁ − κ₂X)ds + (1+γ)∫X^α dZ`, `α = γ/(1+γ)`,
///
/// with both integrals replaced by left-point sums on the path's grid. The
/// stochastic sum is a Young integral only for Hölder exponents above ½, so
/// drivers with `H ≤ ½` are refused.
pub fn verify_ckls(
    path: &SimulatedPath,
    noise: &NoisePath,
    gamma: f64,
    kappa1: f64,
    kappa2: f64,
) -> Result<f64> {
    if noise.grid != path.grid {
        return Err(invalid("noise and path live on different grids"));
    }
    let horizon = noise.grid.horizon();
    let regular = match noise.spec.min_hurst(horizon) {
        Some(h) => h > 0.5,
        None => noise.holder_exponent() > 0.5,
    };
    if !regular {
        return Err(Error::Refused(
            "Riemann–Stieltjes sums need a driver with Hölder exponent above 1/2".into(),
        ));
    }
    let x = ckls_transform(path, gamma)?;
    let factor = 1.0 + gamma;
    let delta = noise.grid.delta();
    let mut rhs = x.values[0];
    let mut worst = 0.0f64;
    for k in 0..noise.grid.steps() {
        let xk = x.values[k];
        let elastic = if gamma == 0.0 { 1.0 } else { xk.powf(x.alpha) };
        rhs += factor * ((kappa1 - kappa2 * xk) * delta + elastic * noise.increment(k + 1));
        worst = worst.max((x.values[k + 1] - rhs).abs());
    }
    Ok(worst)
}
