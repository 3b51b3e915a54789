//! The drift-implicit Euler scheme and its step solvers.

mod cir;
mod cubic;
mod generic;
mod sandwich;

use serde::{Deserialize, Serialize};

pub use cir::implicit_step_cir;
pub use cubic::{admissible_roots, cardano_solve, implicit_step_tsb, tsb_coefficients, REAL_ROOT_TOL};
pub use generic::implicit_step_generic;
pub use sandwich::{check_sandwich, EnvelopeCheck, SandwichReport};

use crate::error::{invalid, Error, Result};
use crate::model::{max_mesh, DriftFamily, DriftSpec, SandwichConfig};
use crate::noise::{NoisePath, TimeGrid};

/// Default relative residual tolerance of a step.
pub const DEFAULT_TOL: f64 = 1e-12;

/// `y − b(t_{k+1}, y)Δ = z` with `z = Ŷ(t_k) + ΔZ_{k+1}`.
#[derive(Clone, Copy, Debug)]
pub struct ImplicitStepEquation<'a> {
    pub t_next: f64,
    pub delta: f64,
    pub rhs: f64,
    /// `Ŷ(t_k)`, used only to seed the one-sided bracket.
    pub y_prev: f64,
    pub drift: &'a DriftSpec,
}

impl ImplicitStepEquation<'_> {
    /// `g(y) − z`
    #[inline]
    pub fn residual(&self, y: f64) -> f64 {
        y - self.drift.value(self.t_next, y) * self.delta - self.rhs
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepperChoice {
    /// Closed form where the family has one, generic otherwise.
    #[default]
    Auto,
    /// Closed form or an error.
    #[serde(alias = "closed")]
    ClosedForm,
    Generic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepperKind {
    ClosedFormCir,
    CardanoTsb,
    BracketedGeneric,
}

impl StepperChoice {
    pub fn resolve(self, drift: &DriftSpec) -> Result<StepperKind> {
        let closed = match drift.family() {
            DriftFamily::Cir { gamma, .. } if *gamma == 1.0 => Some(StepperKind::ClosedFormCir),
            DriftFamily::Tsb { .. } => Some(StepperKind::CardanoTsb),
            _ => None,
        };
        match self {
            StepperChoice::Auto => Ok(closed.unwrap_or(StepperKind::BracketedGeneric)),
            StepperChoice::Generic => Ok(StepperKind::BracketedGeneric),
            StepperChoice::ClosedForm => closed.ok_or_else(|| {
                invalid(format!(
                    "no closed-form step for {:?}; use the generic stepper",
                    drift.family()
                ))
            }),
        }
    }
}

/// Solves one implicit step with the given stepper.
pub fn implicit_step(eq: &ImplicitStepEquation<'_>, kind: StepperKind, tol: f64) -> Result<f64> {
    match kind {
        StepperKind::ClosedFormCir => match *eq.drift.family() {
            DriftFamily::Cir { kappa1, kappa2, .. } => {
                Ok(implicit_step_cir(eq.rhs, eq.delta, 0.0, kappa1, kappa2))
            }
            _ => Err(invalid("the quadratic stepper applies to the CIR drift only")),
        },
        StepperKind::CardanoTsb => implicit_step_tsb(eq),
        StepperKind::BracketedGeneric => implicit_step_generic(eq, tol),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateOptions {
    pub stepper: StepperChoice,
    pub tol: f64,
    /// Run even when the mesh condition fails.
    pub allow_unsafe_mesh: bool,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        SimulateOptions {
            stepper: StepperChoice::Auto,
            tol: DEFAULT_TOL,
            allow_unsafe_mesh: false,
        }
    }
}

/// `Ŷ(t_k)` on the grid; `Ŷ(t) = Ŷ(t_k)` on `[t_k, t_{k+1})`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulatedPath {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub noise_seed: u64,
    pub stepper: StepperKind,
    /// `|Ŷ_{k+1} − b Δ − Ŷ_k − ΔZ_{k+1}|` for each step, so `residuals[k]` belongs to `t_{k+1}`.
    pub residuals: Vec<f64>,
}

impl SimulatedPath {
    /// Piecewise-constant extension.
    pub fn at(&self, t: f64) -> f64 {
        let n = self.grid.steps();
        let k = ((t / self.grid.delta()).floor().max(0.0) as usize).min(n);
        self.values[k]
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Runs the scheme over the noise grid.
///
/// Refuses to start if the mesh condition fails, unless overridden. Every
/// step must land strictly inside the domain and meet
/// `|residual| ≤ tol·max(1, |z|)`.
pub fn simulate(config: &SandwichConfig, noise: &NoisePath, opts: &SimulateOptions) -> Result<SimulatedPath> {
    let grid = config.grid();
    if noise.grid != grid {
        return Err(invalid(format!(
            "noise grid (T={}, N={}) differs from the model grid (T={}, N={})",
            noise.grid.horizon(),
            noise.grid.steps(),
            grid.horizon(),
            grid.steps()
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let delta = grid.delta();
    let mesh = max_mesh(config);
    if !mesh.admits(delta) {
        if opts.allow_unsafe_mesh {
            log::warn!("mesh {delta:e} exceeds the admissible {:e}; running anyway", mesh.delta_max);
        } else {
            return Err(Error::MeshCondition {
                delta,
                max: mesh.delta_max,
            });
        }
    }
    let drift = config.drift();
    drift.check_domain(0.0, config.y0())?;
    let kind = opts.stepper.resolve(drift)?;

    let n = grid.steps();
    let mut values = Vec::with_capacity(n + 1);
    let mut residuals = Vec::with_capacity(n);
    let mut y = config.y0();
    values.push(y);
    for k in 0..n {
        let eq = ImplicitStepEquation {
            t_next: grid.time(k + 1),
            delta,
            rhs: y + noise.increment(k + 1),
            y_prev: y,
            drift,
        };
        let wrap = |e: Error| Error::Step {
            step: k + 1,
            state: y,
            source: Box::new(e),
        };
        let next = implicit_step(&eq, kind, opts.tol).map_err(wrap)?;
        drift.check_domain(eq.t_next, next).map_err(wrap)?;
        let r = eq.residual(next).abs();
        let bound = opts.tol * eq.rhs.abs().max(1.0);
        if !(r <= bound) {
            return Err(Error::Residual {
                step: k + 1,
                residual: r,
                bound,
            });
        }
        residuals.push(r);
        y = next;
        values.push(y);
    }
    Ok(SimulatedPath {
        grid,
        values,
        noise_seed: noise.seed,
        stepper: kind,
        residuals,
    })
}
