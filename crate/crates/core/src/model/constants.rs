use serde::Serialize;

use super::{SandwichConfig, SandwichKind};
use crate::error::{invalid, Result};

/// Fraction of the strict mesh bound handed out by [`max_mesh`].
pub const MESH_SAFETY: f64 = 0.99;

const PHI_SAMPLES: usize = 4097;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshTerm {
    /// `c3 Δ < 1`
    DerivativeBound,
    /// `c1/(Y(0)−φ(0))ᵖ Δ < 1` (one-sided only)
    LipschitzBlowup,
    /// Neither term constrains the mesh below `T`.
    Horizon,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeshLimit {
    pub delta_max: f64,
    pub binding: MeshTerm,
    /// `c3` as used, or `None` when non-positive (vacuous constraint).
    pub derivative_term: Option<f64>,
    /// `c1/min(Y(0)−φ(0), 1)ᵖ`, one-sided only.
    pub lipschitz_term: Option<f64>,
}

impl MeshLimit {
    pub fn admits(&self, delta: f64) -> bool {
        delta <= self.delta_max
    }
}

/// Lipschitz constant of the drift on `{y ≥ φ + a}` implied by the
/// regularity constants. The bound `c1/εᵖ` is only asserted for `ε ≤ 1`, so
/// distances above one are clamped.
fn lipschitz_at_start(config: &SandwichConfig) -> f64 {
    let c = config.drift().constants();
    let a = config.y0() - config.bounds().phi(0.0);
    if a > 0.0 {
        c.c1 / a.min(1.0).powf(c.p)
    } else {
        f64::INFINITY
    }
}

/// Largest admissible mesh: `0.99/c3` two-sided, `0.99/max(c3, c1/aᵖ)`
/// one-sided, clamped to the horizon.
pub fn max_mesh(config: &SandwichConfig) -> MeshLimit {
    let c3 = config.drift().constants().c3;
    let derivative_term = (c3 > 0.0).then_some(c3);
    let lipschitz_term = match config.kind() {
        SandwichKind::OneSided => Some(lipschitz_at_start(config)),
        SandwichKind::TwoSided => None,
    };
    let d = derivative_term.unwrap_or(0.0);
    let l = lipschitz_term.unwrap_or(0.0);
    let rate = d.max(l);
    let (raw, binding) = if rate <= 0.0 {
        (f64::INFINITY, MeshTerm::Horizon)
    } else if l > d {
        (MESH_SAFETY / rate, MeshTerm::LipschitzBlowup)
    } else {
        (MESH_SAFETY / rate, MeshTerm::DerivativeBound)
    };
    let horizon = config.horizon();
    let (delta_max, binding) = if raw >= horizon {
        (horizon, MeshTerm::Horizon)
    } else {
        (raw, binding)
    };
    MeshLimit {
        delta_max,
        binding,
        derivative_term,
        lipschitz_term,
    }
}

/// Constants of the discrete sandwich bounds
///
/// ```text
/// φ(tₙ) + L₁/(L₂ + Λ)^θ ≤ Ŷ(tₙ) ≤ ψ(tₙ) − L₁/(L₂ + Λ)^θ    (two-sided)
/// φ(tₙ) + L₁/(L₂ + Λ)^θ ≤ Ŷ(tₙ) ≤ L₃ + L₄Λ              (one-sided)
/// ```
///
/// with `θ = 1/(γλ + λ − 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundConstants {
    pub beta: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: Option<f64>,
    pub l4: Option<f64>,
    /// `θ = 1/(γλ + λ − 1)`
    pub exponent: f64,
    /// Smallest `N` with `c1/aᵖ · T/N < 1` (one-sided).
    pub n0: Option<usize>,
    /// Linear-growth constant `C` in `|b(t,y)| ≤ C + c1/aᵖ |y|` on `{y ≥ φ + a}`.
    pub growth_constant: Option<f64>,
}

/// Evaluates the bound constants from the regularity constants, `Y(0)`, `K`
/// and `λ`.
///
/// The lower bound uses
/// `β = (λ^{λ/(1−λ)} − λ^{1/(1−λ)})/c2^{λ/(1−λ)}`,
/// `L₂ = K + (2β)^{λ−1} (m/2)^{1−λ−γλ}` with `m = min(Y(0)−φ(0), y*, ψ(0)−Y(0))`
/// and `L₁ = 1/(2^{γλθ} β^{(1−λ)θ})`.
///
/// The one-sided upper bound follows the discrete Gronwall chain with
/// `q = c1/aᵖ`, `a = Y(0) − φ(0)`, `N₀ = ⌊Tq⌋ + 1`, `d = 1 − qT/N₀`:
/// `C = max|b(t, φ(t)+a)| + q max|φ(t)+a|`,
/// `C₁ = (|min φ| + |max φ + a| + TC)/d`, `C₂ = T^λ/d`, `C₃ = q/d`,
/// `L₃ = C₁e^{TC₃}`, `L₄ = C₂e^{TC₃}`.
pub fn bound_constants(config: &SandwichConfig) -> Result<BoundConstants> {
    let drift = config.drift();
    let c = drift.constants();
    let bounds = config.bounds();
    let lambda = bounds.holder_exponent();
    let gamma = c.gamma;
    let denom = gamma * lambda + lambda - 1.0;
    if !(denom > 0.0) {
        return Err(invalid(format!(
            "γλ + λ − 1 = {denom} must be positive (γ > 1/λ − 1)"
        )));
    }
    if !(c.c2 > 0.0 && c.y_star > 0.0) {
        return Err(invalid("repulsion constants c2 and y* must be positive"));
    }
    let exponent = 1.0 / denom;
    let y0 = config.y0();
    let a = y0 - bounds.phi(0.0);
    let mut m = a.min(c.y_star);
    if let Some(psi0) = bounds.psi(0.0) {
        m = m.min(psi0 - y0);
    }
    if !(m > 0.0) {
        return Err(invalid("Y(0) must lie strictly inside the sandwich"));
    }

    let r = lambda / (1.0 - lambda);
    let beta = (lambda.powf(r) - lambda.powf(1.0 / (1.0 - lambda))) / c.c2.powf(r);
    let l2 = bounds.holder_constant()
        + (2.0 * beta).powf(lambda - 1.0) * (m / 2.0).powf(1.0 - lambda - gamma * lambda);
    let l1 = 1.0 / (2f64.powf(gamma * lambda * exponent) * beta.powf((1.0 - lambda) * exponent));

    let (mut l3, mut l4, mut n0, mut growth) = (None, None, None, None);
    if config.kind() == SandwichKind::OneSided {
        let horizon = config.horizon();
        let q = lipschitz_at_start(config);
        let n_min = (horizon * q).floor() as usize + 1;
        if config.grid_points() < n_min {
            return Err(invalid(format!(
                "the upper bound needs N ≥ N₀ = {n_min}, got N = {}",
                config.grid_points()
            )));
        }
        let d = 1.0 - q * horizon / n_min as f64;
        let (phi_min, phi_max) = bounds.phi_fn().extremes(horizon);
        let (b_max, shifted_max) = (0..PHI_SAMPLES)
            .map(|i| horizon * i as f64 / (PHI_SAMPLES - 1) as f64)
            .map(|t| {
                let level = bounds.phi(t) + a;
                (drift.value(t, level).abs(), level.abs())
            })
            .fold((0.0f64, 0.0f64), |(bm, sm), (b, s)| (bm.max(b), sm.max(s)));
        let cg = b_max + q * shifted_max;
        let c1 = (phi_min.abs() + (phi_max + a).abs() + horizon * cg) / d;
        let c2 = horizon.powf(lambda) / d;
        let c3 = q / d;
        let gronwall = (horizon * c3).exp();
        l3 = Some(c1 * gronwall);
        l4 = Some(c2 * gronwall);
        n0 = Some(n_min);
        growth = Some(cg);
    }

    Ok(BoundConstants {
        beta,
        l1,
        l2,
        l3,
        l4,
        exponent,
        n0,
        growth_constant: growth,
    })
}

/// Precomputed theoretical envelope for one configuration.
#[derive(Clone, Debug)]
pub struct Envelope {
    config: SandwichConfig,
    constants: BoundConstants,
}

impl Envelope {
    pub fn new(config: &SandwichConfig) -> Result<Self> {
        Ok(Envelope {
            constants: bound_constants(config)?,
            config: config.clone(),
        })
    }

    pub fn constants(&self) -> &BoundConstants {
        &self.constants
    }

    /// Distance `L₁/(L₂ + Λ)^θ` kept from each bound.
    pub fn margin(&self, lambda_const: f64) -> f64 {
        self.constants.l1 / (self.constants.l2 + lambda_const).powf(self.constants.exponent)
    }

    /// `(lower, upper)` at time `t` for Hölder constant `Λ`.
    pub fn at(&self, lambda_const: f64, t: f64) -> (f64, f64) {
        let margin = self.margin(lambda_const);
        let bounds = self.config.bounds();
        let lower = bounds.phi(t) + margin;
        let upper = match bounds.psi(t) {
            Some(psi) => psi - margin,
            None => {
                self.constants.l3.unwrap_or(f64::INFINITY)
                    + self.constants.l4.unwrap_or(0.0) * lambda_const
            }
        };
        (lower, upper)
    }
}

/// `(lower, upper)` envelope at `t` for Hölder constant `Λ > 0`.
pub fn theoretical_envelope(config: &SandwichConfig, lambda_const: f64, t: f64) -> Result<(f64, f64)> {
    if !(lambda_const > 0.0) {
        return Err(invalid("Λ must be positive"));
    }
    Ok(Envelope::new(config)?.at(lambda_const, t))
}
