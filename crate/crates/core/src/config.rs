//! Strict JSON run configuration.
//!
//! ```json
//! {
//!   "drift": {"family": "cir", "kappa1": 1, "kappa2": 1, "gamma": 1},
//!   "bounds": {"phi": {"kind": "const", "value": 0}, "lambda": 0.69},
//!   "noise": {"kind": "fbm", "H": 0.7},
//!   "y0": 1, "T": 1, "N": 10000,
//!   "run": {"seed": 1, "paths": 10}
//! }
//! ```
//!
//! Unknown keys are rejected. Schema errors are [`Error::Config`] and carry
//! the key path and line; a well-formed file whose values are out of range
//! fails with the model's own error instead.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::ConvergenceStudySpec;
use crate::error::{Error, Result};
use crate::model::{BoundFn, BoundFunctions, DriftSpec, SandwichConfig};
use crate::noise::{GaussianDriverSpec, HurstFn, NoiseMethodChoice};
use crate::solver::{SimulateOptions, StepperChoice, DEFAULT_TOL};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub drift: DriftSection,
    pub bounds: BoundsSection,
    pub noise: NoiseSection,
    pub y0: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "N")]
    pub grid_points: usize,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub study: Option<StudySection>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriftSection {
    Cir {
        kappa1: f64,
        kappa2: f64,
        gamma: f64,
    },
    Tsb {
        kappa1: f64,
        kappa2: f64,
        #[serde(default)]
        kappa3: f64,
    },
    PowerSandwich {
        kappa1: f64,
        kappa2: f64,
        #[serde(default)]
        kappa3: f64,
        gamma: f64,
    },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundSection {
    Const {
        value: f64,
    },
    SinShift {
        #[serde(default)]
        offset: f64,
        amplitude: f64,
        frequency: f64,
    },
}

impl From<BoundSection> for BoundFn {
    fn from(b: BoundSection) -> Self {
        match b {
            BoundSection::Const { value } => BoundFn::Const(value),
            BoundSection::SinShift {
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

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    pub phi: BoundSection,
    #[serde(default)]
    pub psi: Option<BoundSection>,
    /// Defaults to the driver's exponent.
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Defaults to the closed form for the built-in shapes.
    #[serde(default, rename = "K")]
    pub holder_constant: Option<f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HurstSection {
    Constant(f64),
    Function(HurstFn),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSection {
    Brownian {
        #[serde(default)]
        lambda: Option<f64>,
        #[serde(default)]
        method: NoiseMethodChoice,
    },
    Fbm {
        #[serde(rename = "H")]
        hurst: f64,
        #[serde(default)]
        lambda: Option<f64>,
        #[serde(default)]
        method: NoiseMethodChoice,
    },
    Mbm {
        #[serde(rename = "H")]
        hurst: HurstSection,
        #[serde(default)]
        lambda: Option<f64>,
        #[serde(default)]
        method: NoiseMethodChoice,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub paths: usize,
    #[serde(default)]
    pub stepper: StepperChoice,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub unsafe_mesh: bool,
}

fn one() -> usize {
    1
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 0,
            paths: 1,
            stepper: StepperChoice::Auto,
            tol: DEFAULT_TOL,
            unsafe_mesh: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub residuals: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub meshes: Vec<usize>,
    #[serde(rename = "ref")]
    pub reference_n: usize,
    #[serde(default = "hundred")]
    pub paths: usize,
    #[serde(default = "unit")]
    pub r: f64,
    #[serde(default)]
    pub seed_base: u64,
}

fn hundred() -> usize {
    100
}

fn unit() -> f64 {
    1.0
}

/// A parsed and validated configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub raw: RawConfig,
    pub model: SandwichConfig,
    pub noise: GaussianDriverSpec,
    pub noise_method: NoiseMethodChoice,
}

impl RunConfig {
    pub fn simulate_options(&self) -> SimulateOptions {
        SimulateOptions {
            stepper: self.raw.run.stepper,
            tol: self.raw.run.tol,
            allow_unsafe_mesh: self.raw.run.unsafe_mesh,
        }
    }

    /// The study section as a convergence study spec.
    pub fn study_spec(&self) -> Result<ConvergenceStudySpec> {
        let s = self
            .raw
            .study
            .clone()
            .ok_or_else(|| Error::Config("no \"study\" section".into()))?;
        Ok(ConvergenceStudySpec {
            config: self.model.clone(),
            noise: self.noise.clone(),
            noise_method: self.noise_method,
            mesh_list: s.meshes,
            reference_n: s.reference_n,
            paths: s.paths,
            r: s.r,
            seed_base: s.seed_base,
            options: self.simulate_options(),
        })
    }
}

/// Parses JSON text; schema problems become [`Error::Config`].
pub fn parse_raw(text: &str) -> Result<RawConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path.is_empty() || path == "." {
            Error::Config(inner.to_string())
        } else {
            Error::Config(format!("at `{path}`: {inner}"))
        }
    })
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    build(parse_raw(text)?)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Builds the model and driver from a parsed file.
pub fn build(raw: RawConfig) -> Result<RunConfig> {
    let (mut noise, driver_lambda, method) = match &raw.noise {
        NoiseSection::Brownian { lambda, method } => (GaussianDriverSpec::brownian(), *lambda, *method),
        NoiseSection::Fbm {
            hurst,
            lambda,
            method,
        } => (GaussianDriverSpec::fbm(*hurst)?, *lambda, *method),
        NoiseSection::Mbm {
            hurst,
            lambda,
            method,
        } => {
            let h = match *hurst {
                HurstSection::Constant(v) => HurstFn::constant(v),
                HurstSection::Function(f) => f,
            };
            (GaussianDriverSpec::mbm(h), *lambda, *method)
        }
    };
    let lambda = match (raw.bounds.lambda, driver_lambda) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::Config(format!(
                "bounds.lambda = {a} and noise.lambda = {b} disagree; the bounds and the driver share one exponent"
            )))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => noise.holder_exponent(raw.horizon),
    };
    noise = noise.with_holder_exponent(lambda)?;

    let phi: BoundFn = raw.bounds.phi.into();
    let k = raw.bounds.holder_constant;
    let bounds = match raw.bounds.psi {
        None => BoundFunctions::one_sided(phi, lambda, k, raw.horizon)?,
        Some(psi) => BoundFunctions::two_sided(phi, psi.into(), lambda, k, raw.horizon)?,
    };
    let drift = match raw.drift {
        DriftSection::Cir {
            kappa1,
            kappa2,
            gamma,
        } => DriftSpec::cir(kappa1, kappa2, gamma, bounds)?,
        DriftSection::Tsb {
            kappa1,
            kappa2,
            kappa3,
        } => DriftSpec::tsb(kappa1, kappa2, kappa3, bounds)?,
        DriftSection::PowerSandwich {
            kappa1,
            kappa2,
            kappa3,
            gamma,
        } => DriftSpec::power_sandwich(kappa1, kappa2, kappa3, gamma, bounds)?,
    };
    let model = SandwichConfig::new(raw.y0, drift, raw.grid_points)?;
    Ok(RunConfig {
        raw,
        model,
        noise,
        noise_method: method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = r#"{
        "drift": {"family": "cir", "kappa1": 1, "kappa2": 1, "gamma": 1},
        "bounds": {"phi": {"kind": "const", "value": 0}},
        "noise": {"kind": "fbm", "H": 0.7},
        "y0": 1, "T": 1, "N": 10000
    }"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = parse_config(FIG1).unwrap();
        assert!((c.model.bounds().holder_exponent() - 0.69).abs() < 1e-15);
        assert_eq!(c.raw.run.paths, 1);
        assert_eq!(c.raw.run.tol, 1e-12);
        assert_eq!(c.model.grid_points(), 10_000);
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_path() {
        let bad = FIG1.replace("\"gamma\": 1", "\"gamma\": 1, \"gama\": 2");
        match parse_config(&bad) {
            Err(Error::Config(msg)) => assert!(msg.contains("gama"), "{msg}"),
            other => panic!("{other:?}"),
        }
        let bad = FIG1.replace("\"N\": 10000", "\"N\": 10000, \"extra\": true");
        assert!(matches!(parse_config(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn malformed_json_is_a_config_error() {
        assert!(matches!(parse_config("{\"drift\": "), Err(Error::Config(_))));
    }

    #[test]
    fn mbm_hurst_accepts_number_or_function() {
        let base = r#"{
            "drift": {"family": "power_sandwich", "kappa1": 1, "kappa2": 1, "gamma": 4},
            "bounds": {"phi": {"kind": "sin_shift", "amplitude": 1, "frequency": 10},
                       "psi": {"kind": "sin_shift", "offset": 2, "amplitude": 1, "frequency": 10},
                       "lambda": 0.29},
            "noise": {"kind": "mbm", "H": HURST},
            "y0": 1, "T": 1, "N": 100
        }"#;
        let c = parse_config(&base.replace("HURST", "0.7")).unwrap();
        assert!(c.model.bounds().is_two_sided());
        let f = r#"{"kind": "sin_shift", "offset": 0.5, "amplitude": 0.2, "frequency": 6.283185307179586}"#;
        let c = parse_config(&base.replace("HURST", f)).unwrap();
        assert_eq!(c.noise.min_hurst(1.0).map(|h| (h * 1e9).round()), Some(0.3e9));
    }

    #[test]
    fn conflicting_exponents_are_rejected() {
        let bad = FIG1
            .replace("\"value\": 0}", "\"value\": 0}, \"lambda\": 0.6")
            .replace("\"H\": 0.7", "\"H\": 0.7, \"lambda\": 0.5");
        assert!(matches!(parse_config(&bad), Err(Error::Config(_))));
    }
}
