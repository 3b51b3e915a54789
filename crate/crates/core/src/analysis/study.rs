use rayon::prelude::*;
use serde::Serialize;

use super::errors::{inverse_distance_error, sup_error};
use crate::error::{invalid, Error, Result};
use crate::model::{max_mesh, SandwichConfig};
use crate::noise::{restrict_to_coarse, GaussianDriverSpec, NoiseGenerator, NoiseMethodChoice};
use crate::solver::{simulate, SimulateOptions};

/// A nested-grid Monte Carlo study of the strong error.
///
/// The grid size of `config` is ignored; each path is simulated at
/// `reference_n` and at every entry of `mesh_list` on restrictions of one
/// noise realization with seed `seed_base + m`.
#[derive(Clone, Debug)]
pub struct ConvergenceStudySpec {
    pub config: SandwichConfig,
    pub noise: GaussianDriverSpec,
    pub noise_method: NoiseMethodChoice,
    pub mesh_list: Vec<usize>,
    pub reference_n: usize,
    pub paths: usize,
    pub r: f64,
    pub seed_base: u64,
    pub options: SimulateOptions,
}

impl ConvergenceStudySpec {
    pub fn validate(&self) -> Result<()> {
        if self.mesh_list.is_empty() {
            return Err(invalid("the mesh list is empty"));
        }
        if self.paths == 0 {
            return Err(invalid("a study needs at least one path"));
        }
        if !(self.r >= 1.0 && self.r.is_finite()) {
            return Err(invalid(format!("moment order r={} must be at least 1", self.r)));
        }
        if self.mesh_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("the mesh list must be strictly increasing"));
        }
        for &n in &self.mesh_list {
            if n == 0 || self.reference_n % n != 0 {
                return Err(Error::NotNested {
                    coarse: n,
                    fine: self.reference_n,
                });
            }
            self.check_mesh(n)?;
        }
        let max = *self.mesh_list.last().unwrap();
        if self.reference_n < 8 * max {
            return Err(invalid(format!(
                "reference N={} must be at least 8× the finest mesh N={max}",
                self.reference_n
            )));
        }
        Ok(())
    }

    fn check_mesh(&self, n: usize) -> Result<()> {
        let cfg = self.config.with_grid_points(n)?;
        let mesh = max_mesh(&cfg);
        if !self.options.allow_unsafe_mesh && !mesh.admits(cfg.mesh()) {
            return Err(Error::MeshCondition {
                delta: cfg.mesh(),
                max: mesh.delta_max,
            });
        }
        Ok(())
    }
}

/// Errors of one Monte Carlo path, one entry per mesh.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathSample {
    pub seed: u64,
    pub sup_errors: Vec<f64>,
    pub inverse_lower: Vec<f64>,
    pub inverse_upper: Option<Vec<f64>>,
}

impl PathSample {
    /// The reciprocal error of the theorem: the larger of both sides.
    pub fn inverse_errors(&self) -> Vec<f64> {
        match &self.inverse_upper {
            None => self.inverse_lower.clone(),
            Some(u) => self.inverse_lower.iter().zip(u).map(|(a, b)| a.max(*b)).collect(),
        }
    }
}

/// Raw per-path errors of a study, kept so several moment orders or
/// resamples can be evaluated on the same draws.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudySamples {
    pub mesh_list: Vec<usize>,
    pub reference_n: usize,
    pub horizon: f64,
    pub seed_base: u64,
    pub lambda_expected: f64,
    pub samples: Vec<PathSample>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeshStat {
    #[serde(rename = "N")]
    pub n: usize,
    pub delta: f64,
    /// Mean of `error^r` over paths.
    pub mean_err: f64,
    /// Standard error of `mean_err`; `None` with a single path.
    pub stderr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateSummary {
    pub per_mesh: Vec<MeshStat>,
    /// OLS slope of `log(mean_err^{1/r})` against `log Δ`.
    pub slope: f64,
    /// Leave-one-path-out jackknife; `None` with a single path.
    pub slope_stderr: Option<f64>,
    /// `mean_err` is non-increasing in `N` across the list.
    pub monotone: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub per_mesh: Vec<MeshStat>,
    pub slope: f64,
    pub slope_stderr: Option<f64>,
    pub monotone: bool,
    pub r: f64,
    pub lambda_expected: f64,
    pub reference_n: usize,
    pub paths: usize,
    pub seed_base: u64,
    pub inverse_distance: RateSummary,
}

/// Runs all paths (in parallel) and keeps their raw errors in seed order.
pub fn collect_samples(spec: &ConvergenceStudySpec) -> Result<StudySamples> {
    spec.validate()?;
    let ref_cfg = spec.config.with_grid_points(spec.reference_n)?;
    let generator = NoiseGenerator::new(&spec.noise, &ref_cfg.grid(), spec.noise_method)?;
    let configs: Vec<SandwichConfig> = spec
        .mesh_list
        .iter()
        .map(|&n| spec.config.with_grid_points(n))
        .collect::<Result<_>>()?;
    let bounds = spec.config.bounds();
    let opts = spec.options;

    let samples = (0..spec.paths)
        .into_par_iter()
        .map(|m| {
            let seed = spec.seed_base.wrapping_add(m as u64);
            let at = |n: usize| move |e: Error| Error::Path {
                seed,
                n,
                source: Box::new(e),
            };
            let noise = generator.sample(seed);
            let reference = simulate(&ref_cfg, &noise, &opts).map_err(at(spec.reference_n))?;
            let mut sample = PathSample {
                seed,
                sup_errors: Vec::with_capacity(configs.len()),
                inverse_lower: Vec::with_capacity(configs.len()),
                inverse_upper: bounds.is_two_sided().then(Vec::new),
            };
            for cfg in &configs {
                let n = cfg.grid_points();
                let coarse_noise = restrict_to_coarse(&noise, spec.reference_n / n).map_err(at(n))?;
                let coarse = simulate(cfg, &coarse_noise, &opts).map_err(at(n))?;
                sample.sup_errors.push(sup_error(&coarse, &reference).map_err(at(n))?);
                let (lo, hi) = inverse_distance_error(&coarse, &reference, bounds).map_err(at(n))?;
                sample.inverse_lower.push(lo);
                if let (Some(v), Some(h)) = (sample.inverse_upper.as_mut(), hi) {
                    v.push(h);
                }
            }
            Ok(sample)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(StudySamples {
        mesh_list: spec.mesh_list.clone(),
        reference_n: spec.reference_n,
        horizon: spec.config.horizon(),
        seed_base: spec.seed_base,
        lambda_expected: spec.noise.holder_exponent(spec.config.horizon()),
        samples,
    })
}

/// `collect_samples` followed by [`StudySamples::summarize`] at `spec.r`.
pub fn run_convergence_study(spec: &ConvergenceStudySpec) -> Result<ConvergenceReport> {
    Ok(collect_samples(spec)?.summarize(spec.r))
}

impl StudySamples {
    pub fn deltas(&self) -> Vec<f64> {
        self.mesh_list.iter().map(|&n| self.horizon / n as f64).collect()
    }

    pub fn summarize(&self, r: f64) -> ConvergenceReport {
        let sup: Vec<&[f64]> = self.samples.iter().map(|s| s.sup_errors.as_slice()).collect();
        let inv_owned: Vec<Vec<f64>> = self.samples.iter().map(|s| s.inverse_errors()).collect();
        let inv: Vec<&[f64]> = inv_owned.iter().map(|v| v.as_slice()).collect();
        let main = rate_summary(&self.mesh_list, &self.deltas(), &sup, r);
        ConvergenceReport {
            per_mesh: main.per_mesh,
            slope: main.slope,
            slope_stderr: main.slope_stderr,
            monotone: main.monotone,
            r,
            lambda_expected: self.lambda_expected,
            reference_n: self.reference_n,
            paths: self.samples.len(),
            seed_base: self.seed_base,
            inverse_distance: rate_summary(&self.mesh_list, &self.deltas(), &inv, r),
        }
    }

    /// Same draws, paths picked by `indices` (with repetition), for resampling.
    pub fn resample(&self, indices: &[usize]) -> StudySamples {
        StudySamples {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            ..self.clone_empty()
        }
    }

    fn clone_empty(&self) -> StudySamples {
        StudySamples {
            mesh_list: self.mesh_list.clone(),
            reference_n: self.reference_n,
            horizon: self.horizon,
            seed_base: self.seed_base,
            lambda_expected: self.lambda_expected,
            samples: Vec::new(),
        }
    }
}

/// Per-mesh means of `err^r`, squared-error standard errors, and the slope.
pub fn rate_summary(mesh_list: &[usize], deltas: &[f64], errors: &[&[f64]], r: f64) -> RateSummary {
    let m = errors.len();
    let k = mesh_list.len();
    let powered: Vec<Vec<f64>> = errors
        .iter()
        .map(|e| e.iter().map(|x| x.powf(r)).collect())
        .collect();
    let sums: Vec<f64> = (0..k).map(|j| powered.iter().map(|p| p[j]).sum()).collect();
    let means: Vec<f64> = sums.iter().map(|s| s / m as f64).collect();
    let per_mesh = (0..k)
        .map(|j| {
            let stderr = (m > 1).then(|| {
                let var = powered.iter().map(|p| (p[j] - means[j]).powi(2)).sum::<f64>()
                    / (m - 1) as f64;
                (var / m as f64).sqrt()
            });
            MeshStat {
                n: mesh_list[j],
                delta: deltas[j],
                mean_err: means[j],
                stderr,
            }
        })
        .collect();
    let slope = fitted_slope(deltas, &means, r);
    let slope_stderr = (m > 1).then(|| {
        let loo: Vec<f64> = powered
            .iter()
            .map(|p| {
                let means: Vec<f64> = (0..k).map(|j| (sums[j] - p[j]) / (m - 1) as f64).collect();
                fitted_slope(deltas, &means, r)
            })
            .collect();
        let avg = loo.iter().sum::<f64>() / m as f64;
        ((m - 1) as f64 / m as f64 * loo.iter().map(|s| (s - avg).powi(2)).sum::<f64>()).sqrt()
    });
    RateSummary {
        per_mesh,
        slope,
        slope_stderr,
        monotone: means.windows(2).all(|w| w[1] <= w[0]),
    }
}

/// OLS slope of `log(mean^{1/r})` against `log Δ`.
pub fn fitted_slope(deltas: &[f64], means: &[f64], r: f64) -> f64 {
    let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = means.iter().map(|m| m.ln() / r).collect();
    ols_slope(&xs, &ys)
}

pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
