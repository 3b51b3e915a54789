use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};

use super::TimeGrid;
use crate::error::{invalid, Error, Result};

/// Eigenvalues this far below zero (relative to the largest) are rounding.
const EIGEN_TOL: f64 = 1e-10;

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
pub(crate) fn fgn_autocovariance(k: usize, hurst: f64) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// Davies–Harte sampler: fractional Gaussian noise embedded in a circulant
/// of size `2N`, diagonalized by one FFT.
pub struct CirculantFbm {
    n: usize,
    scale: f64,
    /// `√(λ_k / 2N)`
    sqrt_eigen: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl CirculantFbm {
    pub fn new(hurst: f64, grid: &TimeGrid) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(invalid(format!("Hurst index {hurst} must lie in (0, 1)")));
        }
        let n = grid.steps();
        let m = 2 * n;
        let mut row: Vec<Complex64> = (0..m)
            .map(|j| {
                let lag = if j <= n { j } else { m - j };
                Complex64::new(fgn_autocovariance(lag, hurst), 0.0)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        fft.process(&mut row);
        let max = row.iter().map(|c| c.re).fold(0.0, f64::max);
        let min = row.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
        if min < -EIGEN_TOL * max {
            return Err(Error::NegativeEigenvalue(min));
        }
        let sqrt_eigen = row
            .iter()
            .map(|c| (c.re.max(0.0) / m as f64).sqrt())
            .collect();
        Ok(CirculantFbm {
            n,
            scale: grid.delta().powf(hurst),
            sqrt_eigen,
            fft,
        })
    }

    /// Cumulative sums of `N` noise increments, scaled by `Δ^H`; `4N`
    /// standard normals are drawn in index order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut w: Vec<Complex64> = self
            .sqrt_eigen
            .iter()
            .map(|&s| {
                let a: f64 = StandardNormal.sample(rng);
                let b: f64 = StandardNormal.sample(rng);
                Complex64::new(s * a, s * b)
            })
            .collect();
        self.fft.process(&mut w);
        let mut out = Vec::with_capacity(self.n + 1);
        let mut z = 0.0;
        out.push(0.0);
        for c in &w[..self.n] {
            z += self.scale * c.re;
            out.push(z);
        }
        out
    }
}
