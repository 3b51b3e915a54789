use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::bounds::BoundFunctions;
use crate::error::{invalid, Error, Result};

/// A drift `b(t, y)` together with its spatial derivative.
///
/// Implementations are only ever evaluated strictly inside the sandwich.
pub trait Drift: Send + Sync {
    fn value(&self, t: f64, y: f64) -> f64;
    fn dy(&self, t: f64, y: f64) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SandwichKind {
    OneSided,
    TwoSided,
}

/// Regularity constants of a drift.
///
/// - `c1`, `p`: `|b(t₁,y₁) − b(t₂,y₂)| ≤ c1/εᵖ (|y₁−y₂| + |t₁−t₂|^λ)` on the
///   set of points at distance at least `ε ≤ 1` from the bounds.
/// - `c2`, `gamma`, `y_star`: `b ≥ c2/(y−φ)^γ` when `y − φ ≤ y*` (and the
///   mirrored inequality at `ψ`).
/// - `c3`: strict upper bound on `∂b/∂y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityConstants {
    pub c1: f64,
    pub p: f64,
    pub c2: f64,
    pub gamma: f64,
    pub y_star: f64,
    pub c3: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DriftFamily {
    /// `κ₁/y^γ − κ₂y` above `φ ≡ 0`.
    Cir { kappa1: f64, kappa2: f64, gamma: f64 },
    /// `κ₁/(y−φ) − κ₂/(ψ−y) − κ₃y`.
    Tsb { kappa1: f64, kappa2: f64, kappa3: f64 },
    /// `κ₁/(y−φ)^γ − κ₂/(ψ−y)^γ − κ₃y`.
    PowerSandwich {
        kappa1: f64,
        kappa2: f64,
        kappa3: f64,
        gamma: f64,
    },
    Custom { name: String },
}

/// A drift with its regularity constants and sandwich bounds.
#[derive(Clone)]
pub struct DriftSpec {
    family: DriftFamily,
    custom: Option<Arc<dyn Drift>>,
    constants: RegularityConstants,
    bounds: BoundFunctions,
}

impl fmt::Debug for DriftSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DriftSpec")
            .field("family", &self.family)
            .field("constants", &self.constants)
            .field("bounds", &self.bounds)
            .finish()
    }
}

#[inline]
fn pow(x: f64, g: f64) -> f64 {
    if g == 1.0 {
        x
    } else if g == g.trunc() && g.abs() <= 16.0 {
        x.powi(g as i32)
    } else {
        x.powf(g)
    }
}

impl DriftSpec {
    /// Generalized CIR drift `κ₁/y^γ − κ₂y`, one-sided with `φ ≡ 0`.
    ///
    /// Constants: `∂b/∂y = −γκ₁/y^{γ+1} − κ₂ < 0`, so `c3 = 1`; on `y ≥ ε ≤ 1`
    /// the derivative is at most `(γκ₁ + κ₂)/ε^{γ+1}`, giving `c1 = γκ₁ + κ₂`
    /// and `p = γ + 1`; below `y* = (κ₁/(2κ₂))^{1/(γ+1)}` the linear term
    /// eats at most half of `κ₁/y^γ`, giving `c2 = κ₁/2`.
    pub fn cir(kappa1: f64, kappa2: f64, gamma: f64, bounds: BoundFunctions) -> Result<Self> {
        if bounds.is_two_sided() || !bounds.phi_fn().is_zero() {
            return Err(invalid("the CIR drift is one-sided with φ ≡ 0"));
        }
        if !(kappa1 > 0.0 && kappa2 > 0.0) {
            return Err(invalid("CIR drift needs κ₁ > 0 and κ₂ > 0"));
        }
        if !gamma.is_finite() {
            return Err(invalid("γ must be finite"));
        }
        let constants = RegularityConstants {
            c1: gamma.max(0.0) * kappa1 + kappa2,
            p: gamma + 1.0,
            c2: kappa1 / 2.0,
            gamma,
            y_star: (kappa1 / (2.0 * kappa2)).powf(1.0 / (gamma + 1.0)),
            c3: 1.0,
        };
        Ok(DriftSpec {
            family: DriftFamily::Cir {
                kappa1,
                kappa2,
                gamma,
            },
            custom: None,
            constants,
            bounds,
        })
    }

    /// TSB-type drift `κ₁/(y−φ) − κ₂/(ψ−y) − κ₃y`.
    pub fn tsb(kappa1: f64, kappa2: f64, kappa3: f64, bounds: BoundFunctions) -> Result<Self> {
        let constants = power_constants(kappa1, kappa2, kappa3, 1.0, &bounds)?;
        Ok(DriftSpec {
            family: DriftFamily::Tsb {
                kappa1,
                kappa2,
                kappa3,
            },
            custom: None,
            constants,
            bounds,
        })
    }

    /// Power sandwich drift `κ₁/(y−φ)^γ − κ₂/(ψ−y)^γ − κ₃y`.
    pub fn power_sandwich(
        kappa1: f64,
        kappa2: f64,
        kappa3: f64,
        gamma: f64,
        bounds: BoundFunctions,
    ) -> Result<Self> {
        let constants = power_constants(kappa1, kappa2, kappa3, gamma, &bounds)?;
        Ok(DriftSpec {
            family: DriftFamily::PowerSandwich {
                kappa1,
                kappa2,
                kappa3,
                gamma,
            },
            custom: None,
            constants,
            bounds,
        })
    }

    /// A caller-supplied drift. The constants are taken on trust here and
    /// spot-checked by [`validate_assumptions`](super::validate_assumptions).
    pub fn custom(
        name: impl Into<String>,
        drift: Arc<dyn Drift>,
        constants: RegularityConstants,
        bounds: BoundFunctions,
    ) -> Self {
        DriftSpec {
            family: DriftFamily::Custom { name: name.into() },
            custom: Some(drift),
            constants,
            bounds,
        }
    }

    pub fn family(&self) -> &DriftFamily {
        &self.family
    }

    pub fn constants(&self) -> &RegularityConstants {
        &self.constants
    }

    pub fn bounds(&self) -> &BoundFunctions {
        &self.bounds
    }

    pub fn kind(&self) -> SandwichKind {
        if self.bounds.is_two_sided() {
            SandwichKind::TwoSided
        } else {
            SandwichKind::OneSided
        }
    }

    /// `b(t, y)` without the domain check.
    #[inline]
    pub fn value(&self, t: f64, y: f64) -> f64 {
        match &self.family {
            DriftFamily::Cir {
                kappa1,
                kappa2,
                gamma,
            } => kappa1 / pow(y, *gamma) - kappa2 * y,
            DriftFamily::Tsb {
                kappa1,
                kappa2,
                kappa3,
            } => {
                let (lo, hi) = self.interval(t);
                kappa1 / (y - lo) - kappa2 / (hi - y) - kappa3 * y
            }
            DriftFamily::PowerSandwich {
                kappa1,
                kappa2,
                kappa3,
                gamma,
            } => {
                let (lo, hi) = self.interval(t);
                kappa1 / pow(y - lo, *gamma) - kappa2 / pow(hi - y, *gamma) - kappa3 * y
            }
            DriftFamily::Custom { .. } => self.custom.as_ref().map_or(f64::NAN, |d| d.value(t, y)),
        }
    }

    /// `∂b/∂y (t, y)` without the domain check.
    #[inline]
    pub fn dy(&self, t: f64, y: f64) -> f64 {
        match &self.family {
            DriftFamily::Cir {
                kappa1,
                kappa2,
                gamma,
            } => -gamma * kappa1 / pow(y, gamma + 1.0) - kappa2,
            DriftFamily::Tsb {
                kappa1,
                kappa2,
                kappa3,
            } => {
                let (lo, hi) = self.interval(t);
                let (u, v) = (y - lo, hi - y);
                -kappa1 / (u * u) - kappa2 / (v * v) - kappa3
            }
            DriftFamily::PowerSandwich {
                kappa1,
                kappa2,
                kappa3,
                gamma,
            } => {
                let (lo, hi) = self.interval(t);
                let g1 = gamma + 1.0;
                -gamma * kappa1 / pow(y - lo, g1) - gamma * kappa2 / pow(hi - y, g1) - kappa3
            }
            DriftFamily::Custom { .. } => self.custom.as_ref().map_or(f64::NAN, |d| d.dy(t, y)),
        }
    }

    /// `(φ(t), ψ(t))`, with `ψ = +∞` one-sided.
    #[inline]
    pub fn interval(&self, t: f64) -> (f64, f64) {
        (
            self.bounds.phi(t),
            self.bounds.psi(t).unwrap_or(f64::INFINITY),
        )
    }

    #[inline]
    pub fn in_domain(&self, t: f64, y: f64) -> bool {
        let (lo, hi) = self.interval(t);
        y.is_finite() && y > lo && y < hi
    }

    pub fn check_domain(&self, t: f64, y: f64) -> Result<()> {
        let (lo, hi) = self.interval(t);
        if !y.is_finite() {
            return Err(Error::Domain {
                t,
                y,
                reason: "non-finite state".into(),
            });
        }
        if y <= lo {
            return Err(Error::Domain {
                t,
                y,
                reason: format!("y ≤ φ(t) = {lo}"),
            });
        }
        if y >= hi {
            return Err(Error::Domain {
                t,
                y,
                reason: format!("y ≥ ψ(t) = {hi}"),
            });
        }
        Ok(())
    }
}

/// Closed-form constants for `κ₁/(y−φ)^γ − κ₂/(ψ−y)^γ − κ₃y`.
///
/// With `m = min(ψ−φ)` and `M = max(|φ|, |ψ|)`, for `u = y − φ ≤ y*` the
/// drift is at least `κ₁/u^γ − κ₂/(m−y*)^γ − |κ₃|M`; `y*` is halved from
/// `m/4` until the two negative terms cost at most `κ₁/2` (and symmetrically
/// `κ₂/2` at `ψ`), so `c2 = min(κ₁, κ₂)/2`. Lipschitz: `c1 = γ(κ₁+κ₂)·max(1,K)
/// + |κ₃|`, `p = γ+1`, with `K` the joint Hölder constant of the bounds.
fn power_constants(
    kappa1: f64,
    kappa2: f64,
    kappa3: f64,
    gamma: f64,
    bounds: &BoundFunctions,
) -> Result<RegularityConstants> {
    if !bounds.is_two_sided() {
        return Err(invalid("sandwich drifts need both φ and ψ"));
    }
    if !(kappa1 > 0.0 && kappa2 > 0.0) {
        return Err(invalid("sandwich drift needs κ₁ > 0 and κ₂ > 0"));
    }
    if !(gamma > 0.0 && gamma.is_finite()) || !kappa3.is_finite() {
        return Err(invalid("sandwich drift needs finite γ > 0 and finite κ₃"));
    }
    let m = bounds.min_gap();
    let big_m = bounds.max_abs();
    let k = bounds.holder_constant();
    let cost = |ys: f64, other: f64| {
        pow(ys, gamma) * (other / pow(m - ys, gamma) + kappa3.abs() * big_m)
    };
    let mut y_star = m / 4.0;
    for _ in 0..200 {
        if cost(y_star, kappa2) <= kappa1 / 2.0 && cost(y_star, kappa1) <= kappa2 / 2.0 {
            break;
        }
        y_star /= 2.0;
    }
    Ok(RegularityConstants {
        c1: gamma * (kappa1 + kappa2) * k.max(1.0) + kappa3.abs(),
        p: gamma + 1.0,
        c2: kappa1.min(kappa2) / 2.0,
        gamma,
        y_star,
        c3: (-kappa3).max(1.0),
    })
}

/// `b(t, y)` with an explicit domain check.
pub fn eval_drift(spec: &DriftSpec, t: f64, y: f64) -> Result<f64> {
    spec.check_domain(t, y)?;
    Ok(spec.value(t, y))
}
