use faer::{Mat, Side};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{fill_covariance, GaussianDriverSpec, TimeGrid};
use crate::error::{Error, Result};

/// Relative diagonal jitter of the first retry, as a fraction of `trace/N`.
const JITTER: f64 = 1e-12;
/// Jitter doublings before giving up.
const JITTER_DOUBLINGS: usize = 8;
/// Largest matrix for which a failed factorization triggers an eigenvalue
/// estimate for the error message.
const EIGEN_ESTIMATE_MAX_N: usize = 2048;

/// Lower Cholesky factor of the grid covariance, packed by rows.
pub struct CholeskySampler {
    n: usize,
    packed: Vec<f64>,
    jitter: f64,
}

impl CholeskySampler {
    /// Factors `C + εI`, starting at `ε = 0` and then `ε = 10⁻¹²·tr(C)/N`
    /// doubled up to eight times.
    pub fn new(spec: &GaussianDriverSpec, grid: &TimeGrid) -> Result<Self> {
        let n = grid.steps();
        let mut cov = Mat::<f64>::zeros(n, n);
        fill_covariance(spec, grid, |i, j, v| cov[(i, j)] = v);
        if let Some(bad) = (0..n)
            .flat_map(|i| (0..=i).map(move |j| (i, j)))
            .find(|&(i, j)| !cov[(i, j)].is_finite())
        {
            return Err(crate::error::invalid(format!(
                "covariance entry {bad:?} is not finite"
            )));
        }
        let trace: f64 = (0..n).map(|i| cov[(i, i)]).sum();
        let base = JITTER * (trace / n as f64).abs().max(f64::MIN_POSITIVE);

        let mut applied = 0.0;
        let mut attempt = 0usize;
        let llt = loop {
            match cov.llt(Side::Lower) {
                Ok(llt) => break llt,
                Err(_) if attempt <= JITTER_DOUBLINGS => {
                    let target = base * 2f64.powi(attempt as i32);
                    for i in 0..n {
                        cov[(i, i)] += target - applied;
                    }
                    applied = target;
                    attempt += 1;
                }
                Err(_) => {
                    for i in 0..n {
                        cov[(i, i)] -= applied;
                    }
                    let min_eigenvalue = if n <= EIGEN_ESTIMATE_MAX_N {
                        cov.self_adjoint_eigenvalues(Side::Lower)
                            .ok()
                            .and_then(|v| v.first().copied())
                    } else {
                        None
                    };
                    return Err(Error::Cholesky {
                        attempts: attempt + 1,
                        min_eigenvalue,
                    });
                }
            }
        };
        if applied > 0.0 {
            log::warn!("covariance factored with diagonal jitter {applied:e}");
        }
        drop(cov);
        let l = llt.L();
        let mut packed = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..=i {
                packed.push(l[(i, j)]);
            }
        }
        Ok(CholeskySampler {
            n,
            packed,
            jitter: applied,
        })
    }

    /// Diagonal jitter that was needed, zero if none.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Row `i` of the factor, `L[i][0..=i]`.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let start = i * (i + 1) / 2;
        &self.packed[start..start + i + 1]
    }

    /// `[0, (Lξ)_1, …, (Lξ)_N]` with `ξ` drawn in index order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let xi: Vec<f64> = (0..self.n).map(|_| StandardNormal.sample(rng)).collect();
        let mut out = Vec::with_capacity(self.n + 1);
        out.push(0.0);
        for i in 0..self.n {
            let row = self.row(i);
            out.push(row.iter().zip(&xi).map(|(a, b)| a * b).sum());
        }
        out
    }
}
