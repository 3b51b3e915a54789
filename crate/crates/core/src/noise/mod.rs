//! Gaussian drivers on uniform grids and pathwise Hölder constants.

mod cholesky;
mod circulant;
mod covariance;
mod holder;

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize, Serializer};

pub use cholesky::CholeskySampler;
pub use circulant::CirculantFbm;
pub use covariance::{fbm_covariance, mbm_covariance, mbm_normalizer};
pub use holder::{holder_constant, holder_estimate, HolderEstimate, HolderMode, EXACT_HOLDER_MAX_N};

use crate::error::{invalid, Error, Result};
use crate::model::BoundFn;

/// Uniform partition `t_k = Tk/N`, `k = 0..=N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    horizon: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, n: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid(format!("horizon T={horizon} must be positive")));
        }
        if n == 0 {
            return Err(invalid("a grid needs at least one step"));
        }
        Ok(TimeGrid { horizon, n })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of steps `N`.
    pub fn steps(&self) -> usize {
        self.n
    }

    /// `Δ_N = T/N`
    pub fn delta(&self) -> f64 {
        self.horizon / self.n as f64
    }

    /// `t_k`, with `t_N = T` exactly.
    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        if k == self.n {
            self.horizon
        } else {
            self.horizon * k as f64 / self.n as f64
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..=self.n).map(|k| self.time(k)).collect()
    }

    /// The grid with `N/factor` steps.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.n % factor != 0 {
            return Err(Error::NotNested {
                coarse: if factor == 0 { 0 } else { self.n / factor },
                fine: self.n,
            });
        }
        TimeGrid::new(self.horizon, self.n / factor)
    }
}

/// Hurst function of a multifractional driver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HurstFn {
    Const { value: f64 },
    /// `offset + amplitude · sin(frequency · t)`
    SinShift {
        offset: f64,
        amplitude: f64,
        frequency: f64,
    },
}

impl HurstFn {
    pub fn constant(value: f64) -> Self {
        HurstFn::Const { value }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.as_bound().eval(t)
    }

    /// `(min, max)` on `[0, T]`.
    pub fn extremes(&self, horizon: f64) -> (f64, f64) {
        self.as_bound().extremes(horizon)
    }

    fn as_bound(&self) -> BoundFn {
        match *self {
            HurstFn::Const { value } => BoundFn::Const(value),
            HurstFn::SinShift {
                offset,
                amplitude,
                frequency,
            } => BoundFn::SinShift {
                offset,
                amplitude,
                frequency,
            },
        }
    }
}

pub type CovarianceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum DriverKind {
    Brownian,
    Fbm { hurst: f64 },
    Mbm { hurst: HurstFn },
    Custom { name: String, cov: CovarianceFn },
}

impl fmt::Debug for DriverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriverKind::Brownian => f.write_str("Brownian"),
            DriverKind::Fbm { hurst } => f.debug_struct("Fbm").field("hurst", hurst).finish(),
            DriverKind::Mbm { hurst } => f.debug_struct("Mbm").field("hurst", hurst).finish(),
            DriverKind::Custom { name, .. } => f.debug_struct("Custom").field("name", name).finish(),
        }
    }
}

impl Serialize for DriverKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(None)?;
        match self {
            DriverKind::Brownian => m.serialize_entry("kind", "brownian")?,
            DriverKind::Fbm { hurst } => {
                m.serialize_entry("kind", "fbm")?;
                m.serialize_entry("H", hurst)?;
            }
            DriverKind::Mbm { hurst } => {
                m.serialize_entry("kind", "mbm")?;
                m.serialize_entry("H", hurst)?;
            }
            DriverKind::Custom { name, .. } => {
                m.serialize_entry("kind", "custom")?;
                m.serialize_entry("name", name)?;
            }
        }
        m.end()
    }
}

/// A Gaussian driver and the Hölder exponent `λ` its paths are assumed to have.
#[derive(Clone, Debug, Serialize)]
pub struct GaussianDriverSpec {
    #[serde(flatten)]
    kind: DriverKind,
    #[serde(rename = "lambda")]
    holder_exponent: Option<f64>,
}

impl GaussianDriverSpec {
    pub fn brownian() -> Self {
        GaussianDriverSpec {
            kind: DriverKind::Brownian,
            holder_exponent: None,
        }
    }

    pub fn fbm(hurst: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(invalid(format!("Hurst index {hurst} must lie in (0, 1)")));
        }
        Ok(GaussianDriverSpec {
            kind: DriverKind::Fbm { hurst },
            holder_exponent: None,
        })
    }

    /// The range of `H` is checked against a horizon when sampling.
    pub fn mbm(hurst: HurstFn) -> Self {
        GaussianDriverSpec {
            kind: DriverKind::Mbm { hurst },
            holder_exponent: None,
        }
    }

    /// A user covariance has no canonical exponent, so `λ` is required.
    pub fn custom(name: impl Into<String>, cov: CovarianceFn, holder_exponent: f64) -> Result<Self> {
        GaussianDriverSpec {
            kind: DriverKind::Custom {
                name: name.into(),
                cov,
            },
            holder_exponent: None,
        }
        .with_holder_exponent(holder_exponent)
    }

    pub fn with_holder_exponent(mut self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(invalid(format!("Hölder exponent {lambda} must lie in (0, 1)")));
        }
        self.holder_exponent = Some(lambda);
        Ok(self)
    }

    pub fn kind(&self) -> &DriverKind {
        &self.kind
    }

    /// The override if set, else `H − 0.01` (fBm), `min H − 0.01` (mBm) or
    /// `0.49` (Brownian).
    pub fn holder_exponent(&self, horizon: f64) -> f64 {
        if let Some(l) = self.holder_exponent {
            return l;
        }
        match &self.kind {
            DriverKind::Brownian => 0.49,
            DriverKind::Fbm { hurst } => hurst - 0.01,
            DriverKind::Mbm { hurst } => hurst.extremes(horizon).0 - 0.01,
            DriverKind::Custom { .. } => unreachable!("custom drivers carry λ"),
        }
    }

    /// Smallest Hurst index over `[0, T]`; `None` for custom covariances.
    pub fn min_hurst(&self, horizon: f64) -> Option<f64> {
        match &self.kind {
            DriverKind::Brownian => Some(0.5),
            DriverKind::Fbm { hurst } => Some(*hurst),
            DriverKind::Mbm { hurst } => Some(hurst.extremes(horizon).0),
            DriverKind::Custom { .. } => None,
        }
    }

    /// `E[Z(s)Z(t)]`.
    pub fn covariance(&self, s: f64, t: f64) -> f64 {
        match &self.kind {
            DriverKind::Brownian => s.min(t),
            DriverKind::Fbm { hurst } => covariance::fbm_cov_unchecked(s, t, *hurst),
            DriverKind::Mbm { hurst } => {
                mbm_covariance(s, t, hurst.eval(s), hurst.eval(t)).unwrap_or(f64::NAN)
            }
            DriverKind::Custom { cov, .. } => cov(s, t),
        }
    }

    fn check_on(&self, grid: &TimeGrid) -> Result<()> {
        if let DriverKind::Mbm { hurst } = &self.kind {
            for k in 0..=grid.steps() {
                let h = hurst.eval(grid.time(k));
                if !(h > 0.0 && h < 1.0) {
                    return Err(invalid(format!(
                        "H(t) = {h} at t = {} leaves (0, 1)",
                        grid.time(k)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Dense covariance of `(Z(t_1), …, Z(t_N))`.
pub fn covariance_matrix(spec: &GaussianDriverSpec, grid: &TimeGrid) -> Result<Vec<Vec<f64>>> {
    spec.check_on(grid)?;
    let n = grid.steps();
    let mut out = vec![vec![0.0; n]; n];
    fill_covariance(spec, grid, |i, j, v| {
        out[i][j] = v;
        out[j][i] = v;
    });
    Ok(out)
}

/// Calls `set(i, j, C[i][j])` for `j ≤ i` over indices `0..N` of `t_1..t_N`.
pub(crate) fn fill_covariance(
    spec: &GaussianDriverSpec,
    grid: &TimeGrid,
    mut set: impl FnMut(usize, usize, f64),
) {
    let n = grid.steps();
    let times: Vec<f64> = (1..=n).map(|k| grid.time(k)).collect();
    match &spec.kind {
        DriverKind::Mbm { hurst } => {
            let h: Vec<f64> = times.iter().map(|&t| hurst.eval(t)).collect();
            covariance::mbm_matrix(&times, &h, set);
        }
        _ => {
            for i in 0..n {
                for j in 0..=i {
                    set(i, j, spec.covariance(times[i], times[j]));
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMethod {
    /// Cumulative sum of independent increments (Brownian only).
    Increments,
    Cholesky,
    /// Circulant embedding of fractional Gaussian noise (fBm only).
    Circulant,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMethodChoice {
    /// Increments for Brownian, circulant for fBm, Cholesky otherwise.
    #[default]
    Auto,
    Cholesky,
    Circulant,
}

/// `Z(t_k)` on a grid, with `Z(t_0) = 0`.
#[derive(Clone, Debug, Serialize)]
pub struct NoisePath {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub seed: u64,
    pub spec: GaussianDriverSpec,
    pub method: NoiseMethod,
}

impl NoisePath {
    /// `Z(t_k) − Z(t_{k−1})`, `k ≥ 1`.
    #[inline]
    pub fn increment(&self, k: usize) -> f64 {
        self.values[k] - self.values[k - 1]
    }

    pub fn holder_exponent(&self) -> f64 {
        self.spec.holder_exponent(self.grid.horizon())
    }
}

/// Sampling state reusable across seeds for a fixed driver and grid.
pub struct NoiseGenerator {
    spec: GaussianDriverSpec,
    grid: TimeGrid,
    backend: Backend,
}

enum Backend {
    Increments,
    Cholesky(CholeskySampler),
    Circulant(CirculantFbm),
}

impl NoiseGenerator {
    pub fn new(spec: &GaussianDriverSpec, grid: &TimeGrid, choice: NoiseMethodChoice) -> Result<Self> {
        spec.check_on(grid)?;
        let backend = match (choice, &spec.kind) {
            (NoiseMethodChoice::Auto, DriverKind::Brownian) => Backend::Increments,
            (NoiseMethodChoice::Auto | NoiseMethodChoice::Circulant, DriverKind::Fbm { hurst }) => {
                match CirculantFbm::new(*hurst, grid) {
                    Ok(c) => Backend::Circulant(c),
                    Err(Error::NegativeEigenvalue(v)) => {
                        log::warn!(
                            "circulant embedding has eigenvalue {v:e}; falling back to Cholesky"
                        );
                        Backend::Cholesky(CholeskySampler::new(spec, grid)?)
                    }
                    Err(e) => return Err(e),
                }
            }
            (NoiseMethodChoice::Circulant, _) => {
                return Err(invalid("circulant embedding is only available for fBm drivers"))
            }
            _ => Backend::Cholesky(CholeskySampler::new(spec, grid)?),
        };
        Ok(NoiseGenerator {
            spec: spec.clone(),
            grid: *grid,
            backend,
        })
    }

    pub fn method(&self) -> NoiseMethod {
        match self.backend {
            Backend::Increments => NoiseMethod::Increments,
            Backend::Cholesky(_) => NoiseMethod::Cholesky,
            Backend::Circulant(_) => NoiseMethod::Circulant,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn sample(&self, seed: u64) -> NoisePath {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let values = match &self.backend {
            Backend::Increments => {
                let sd = self.grid.delta().sqrt();
                let mut z = 0.0;
                let mut v = Vec::with_capacity(self.grid.steps() + 1);
                v.push(0.0);
                for _ in 0..self.grid.steps() {
                    let xi: f64 = StandardNormal.sample(&mut rng);
                    z += sd * xi;
                    v.push(z);
                }
                v
            }
            Backend::Cholesky(c) => c.sample(&mut rng),
            Backend::Circulant(c) => c.sample(&mut rng),
        };
        NoisePath {
            grid: self.grid,
            values,
            seed,
            spec: self.spec.clone(),
            method: self.method(),
        }
    }
}

/// One path with the automatic method choice.
pub fn sample_path(spec: &GaussianDriverSpec, grid: &TimeGrid, seed: u64) -> Result<NoisePath> {
    Ok(NoiseGenerator::new(spec, grid, NoiseMethodChoice::Auto)?.sample(seed))
}

/// fBm by circulant embedding, with a Cholesky fallback.
pub fn sample_path_fast_fbm(hurst: f64, grid: &TimeGrid, seed: u64) -> Result<NoisePath> {
    let spec = GaussianDriverSpec::fbm(hurst)?;
    Ok(NoiseGenerator::new(&spec, grid, NoiseMethodChoice::Circulant)?.sample(seed))
}

/// The exact subsample `Z(t_{k·factor})`.
pub fn restrict_to_coarse(path: &NoisePath, factor: usize) -> Result<NoisePath> {
    let grid = path.grid.coarsen(factor)?;
    Ok(NoisePath {
        grid,
        values: path.values.iter().step_by(factor).copied().collect(),
        seed: path.seed,
        spec: path.spec.clone(),
        method: path.method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> TimeGrid {
        TimeGrid::new(1.0, n).unwrap()
    }

    #[test]
    fn grid_endpoints_are_exact() {
        let g = TimeGrid::new(0.3, 7).unwrap();
        assert_eq!(g.time(0), 0.0);
        assert_eq!(g.time(7), 0.3);
        assert_eq!(g.points().len(), 8);
        assert!(TimeGrid::new(0.0, 4).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
    }

    #[test]
    fn brownian_increment_variance() {
        let n = 1 << 14;
        let p = sample_path(&GaussianDriverSpec::brownian(), &grid(n), 11).unwrap();
        assert_eq!(p.values[0], 0.0);
        assert_eq!(p.method, NoiseMethod::Increments);
        let d = 1.0 / n as f64;
        let var = (1..=n).map(|k| p.increment(k).powi(2)).sum::<f64>() / n as f64;
        assert!((var / d - 1.0).abs() < 0.05, "{}", var / d);
    }

    #[test]
    fn half_hurst_fbm_equals_brownian_under_cholesky() {
        let g = grid(32);
        let a = NoiseGenerator::new(&GaussianDriverSpec::brownian(), &g, NoiseMethodChoice::Cholesky)
            .unwrap()
            .sample(5);
        let b = NoiseGenerator::new(&GaussianDriverSpec::fbm(0.5).unwrap(), &g, NoiseMethodChoice::Cholesky)
            .unwrap()
            .sample(5);
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn constant_hurst_mbm_matrix_matches_fbm() {
        let g = grid(128);
        for h in [0.3, 0.7] {
            let a = covariance_matrix(&GaussianDriverSpec::mbm(HurstFn::constant(h)), &g).unwrap();
            let b = covariance_matrix(&GaussianDriverSpec::fbm(h).unwrap(), &g).unwrap();
            for (ra, rb) in a.iter().zip(&b) {
                for (x, y) in ra.iter().zip(rb) {
                    assert!((x - y).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn mbm_range_is_checked() {
        let h = HurstFn::SinShift {
            offset: 0.5,
            amplitude: 0.6,
            frequency: 6.0,
        };
        assert!(sample_path(&GaussianDriverSpec::mbm(h), &grid(16), 0).is_err());
    }

    #[test]
    fn restriction_subsamples_and_composes() {
        let p = sample_path(&GaussianDriverSpec::fbm(0.7).unwrap(), &grid(8), 3).unwrap();
        assert_eq!(restrict_to_coarse(&p, 1).unwrap().values, p.values);
        let r = restrict_to_coarse(&p, 2).unwrap();
        let idx: Vec<f64> = [0, 2, 4, 6, 8].iter().map(|&i| p.values[i]).collect();
        assert_eq!(r.values, idx);
        assert_eq!(r.grid.steps(), 4);
        let rr = restrict_to_coarse(&r, 2).unwrap();
        assert_eq!(rr.values, restrict_to_coarse(&p, 4).unwrap().values);
        assert!(matches!(restrict_to_coarse(&p, 3), Err(Error::NotNested { .. })));
    }

    #[test]
    fn default_exponents() {
        assert_eq!(GaussianDriverSpec::brownian().holder_exponent(1.0), 0.49);
        assert!((GaussianDriverSpec::fbm(0.7).unwrap().holder_exponent(1.0) - 0.69).abs() < 1e-15);
        let h = HurstFn::SinShift {
            offset: 0.5,
            amplitude: 0.2,
            frequency: 2.0 * std::f64::consts::PI,
        };
        assert!((GaussianDriverSpec::mbm(h).holder_exponent(1.0) - 0.29).abs() < 1e-12);
    }
}
