use serde::Serialize;

use super::SimulatedPath;
use crate::model::{Envelope, SandwichConfig};
use crate::noise::{holder_estimate, HolderMode, NoisePath};

/// How many offending indices a report keeps.
const MAX_LISTED: usize = 16;

/// Envelope containment with `Λ̂` taken from the driving noise.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeCheck {
    pub lambda_hat: f64,
    pub holder_mode: HolderMode,
    pub margin: f64,
    pub contained: bool,
    pub violations: usize,
    pub first_violations: Vec<usize>,
    /// `min_k (Ŷ_k − lower_k)`; negative on failure.
    pub lower_slack: f64,
    /// `min_k (upper_k − Ŷ_k)`.
    pub upper_slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichReport {
    /// `φ(t_k) < Ŷ(t_k) (< ψ(t_k))` at every grid point.
    pub strict: bool,
    pub violations: usize,
    pub first_violations: Vec<usize>,
    pub min_distance_lower: f64,
    pub min_distance_upper: Option<f64>,
    pub envelope: Option<EnvelopeCheck>,
    /// Why the envelope was not evaluated, if it was not.
    pub envelope_skipped: Option<String>,
}

/// Checks the strict sandwich at every grid point and, given the noise, the
/// theoretical envelope at the estimated Hölder constant.
pub fn check_sandwich(
    path: &SimulatedPath,
    config: &SandwichConfig,
    noise: Option<&NoisePath>,
) -> SandwichReport {
    let bounds = config.bounds();
    let mut first = Vec::new();
    let mut violations = 0;
    let mut dlo = f64::INFINITY;
    let mut dhi = bounds.is_two_sided().then_some(f64::INFINITY);
    for (k, &y) in path.values.iter().enumerate() {
        let t = path.grid.time(k);
        let lo = y - bounds.phi(t);
        let hi = bounds.psi(t).map(|p| p - y);
        dlo = dlo.min(lo);
        if let (Some(d), Some(h)) = (dhi.as_mut(), hi) {
            *d = d.min(h);
        }
        let ok = y.is_finite() && lo > 0.0 && hi.map_or(true, |h| h > 0.0);
        if !ok {
            violations += 1;
            if first.len() < MAX_LISTED {
                first.push(k);
            }
        }
    }

    let (envelope, envelope_skipped) = match noise {
        None => (None, Some("no noise path supplied".to_string())),
        Some(noise) => match Envelope::new(config) {
            Err(e) => (None, Some(e.to_string())),
            Ok(env) => (Some(envelope_check(path, &env, config, noise)), None),
        },
    };

    SandwichReport {
        strict: violations == 0,
        violations,
        first_violations: first,
        min_distance_lower: dlo,
        min_distance_upper: dhi,
        envelope,
        envelope_skipped,
    }
}

fn envelope_check(
    path: &SimulatedPath,
    env: &Envelope,
    config: &SandwichConfig,
    noise: &NoisePath,
) -> EnvelopeCheck {
    let lambda = config.bounds().holder_exponent();
    let est = holder_estimate(&noise.values, noise.grid.delta(), lambda, None);
    let mut first = Vec::new();
    let mut violations = 0;
    let (mut lower_slack, mut upper_slack) = (f64::INFINITY, f64::INFINITY);
    for (k, &y) in path.values.iter().enumerate() {
        let (lo, hi) = env.at(est.value, path.grid.time(k));
        lower_slack = lower_slack.min(y - lo);
        upper_slack = upper_slack.min(hi - y);
        if !(y >= lo && y <= hi) {
            violations += 1;
            if first.len() < MAX_LISTED {
                first.push(k);
            }
        }
    }
    EnvelopeCheck {
        lambda_hat: est.value,
        holder_mode: est.mode,
        margin: env.margin(est.value),
        contained: violations == 0,
        violations,
        first_violations: first,
        lower_slack,
        upper_slack,
    }
}
