use std::f64::consts::PI;

use num_complex::Complex64;

use super::ImplicitStepEquation;
use crate::error::{invalid, Error, Result};
use crate::model::DriftFamily;

/// Roots with `|Im| ≤ 1e−9·(1+|Re|)` count as real.
pub const REAL_ROOT_TOL: f64 = 1e-9;

/// Coefficients `(B₂, B₁, B₀)` of the monic cubic whose roots in `(φ, ψ)`
/// solve the implicit step for `κ₁/(y−φ) − κ₂/(ψ−y) − κ₃y`, with
/// `z = y_prev + dz` and `φ, ψ` taken at `t_{k+1}`.
#[allow(clippy::too_many_arguments)]
pub fn tsb_coefficients(
    y_prev: f64,
    dz: f64,
    delta: f64,
    kappa1: f64,
    kappa2: f64,
    kappa3: f64,
    phi: f64,
    psi: f64,
) -> Result<(f64, f64, f64)> {
    let a = 1.0 + delta * kappa3;
    if !(a > 0.0) {
        return Err(Error::MeshCondition {
            delta,
            max: if kappa3 < 0.0 { -1.0 / kappa3 } else { f64::INFINITY },
        });
    }
    let z = y_prev + dz;
    let b2 = -phi - psi - z / a;
    let b1 = phi * psi + ((phi + psi) * z - delta * (kappa1 + kappa2)) / a;
    let b0 = (-phi * psi * z + delta * (kappa1 * psi + kappa2 * phi)) / a;
    Ok((b2, b1, b0))
}

#[inline]
fn horner_c(b2: f64, b1: f64, b0: f64, y: Complex64) -> Complex64 {
    ((y + b2) * y + b1) * y + b0
}

/// Newton polish on a complex root; keeps the better of old and new.
fn polish(b2: f64, b1: f64, b0: f64, mut y: Complex64) -> Complex64 {
    for _ in 0..4 {
        let f = horner_c(b2, b1, b0, y);
        let df = (3.0 * y + 2.0 * b2) * y + b1;
        if df.norm() == 0.0 {
            break;
        }
        let next = y - f / df;
        if !(next.re.is_finite() && next.im.is_finite())
            || horner_c(b2, b1, b0, next).norm() >= f.norm()
        {
            break;
        }
        y = next;
    }
    y
}

/// All three roots of `y³ + B₂y² + B₁y + B₀` by Cardano's reduction
/// `y = x − B₂/3`, `x³ + Q₁x + Q₂ = 0`.
///
/// Three real roots (`Q ≤ 0`) use the trigonometric form. Otherwise one cube
/// root is taken on the side that avoids cancellation and its partner comes
/// from `αβ = −Q₁/3`. Each root gets a short Newton polish.
pub fn cardano_solve(b2: f64, b1: f64, b0: f64) -> [Complex64; 3] {
    let shift = b2 / 3.0;
    let q1 = b1 - b2 * b2 / 3.0;
    let q2 = 2.0 * b2 * b2 * b2 / 27.0 - b2 * b1 / 3.0 + b0;
    let p3 = q1 / 3.0;
    let h = q2 / 2.0;
    let q = p3 * p3 * p3 + h * h;

    let roots = if q1 == 0.0 && q2 == 0.0 {
        [Complex64::new(0.0, 0.0); 3]
    } else if q <= 0.0 {
        // p3 < 0 here unless q1 = q2 = 0
        let r = (-p3).sqrt();
        let cos_arg = (-h / (r * r * r)).clamp(-1.0, 1.0);
        let theta = cos_arg.acos() / 3.0;
        let m = 2.0 * r;
        [0.0, 1.0, 2.0].map(|k| Complex64::new(m * (theta - 2.0 * PI * k / 3.0).cos(), 0.0))
    } else {
        let s = q.sqrt();
        let alpha = (-h - h.signum() * s).cbrt();
        let beta = if alpha != 0.0 { -p3 / alpha } else { (-2.0 * h).cbrt() };
        let sum = alpha + beta;
        let diff = alpha - beta;
        let im = 3f64.sqrt() / 2.0 * diff;
        [
            Complex64::new(sum, 0.0),
            Complex64::new(-sum / 2.0, im),
            Complex64::new(-sum / 2.0, -im),
        ]
    };
    roots.map(|x| polish(b2, b1, b0, x - shift))
}

/// The real roots of the cubic inside `(lower, upper)`, for diagnostics.
pub fn admissible_roots(roots: &[Complex64; 3], lower: f64, upper: f64) -> Vec<f64> {
    let mut out: Vec<f64> = roots
        .iter()
        .filter(|r| r.im.abs() <= REAL_ROOT_TOL * (1.0 + r.re.abs()))
        .map(|r| r.re)
        .filter(|&y| y > lower && y < upper)
        .collect();
    out.sort_by(|a, b| a.total_cmp(b));
    // a conjugate pair truncated to the real axis shows up twice
    out.dedup_by(|a, b| (*a - *b).abs() <= REAL_ROOT_TOL * (1.0 + a.abs()));
    out
}

/// The TSB step: the unique root of the cubic in `(φ(t_{k+1}), ψ(t_{k+1}))`.
pub fn implicit_step_tsb(eq: &ImplicitStepEquation<'_>) -> Result<f64> {
    let DriftFamily::Tsb {
        kappa1,
        kappa2,
        kappa3,
    } = *eq.drift.family()
    else {
        return Err(invalid("the Cardano stepper applies to the TSB drift only"));
    };
    let (phi, psi) = eq.drift.interval(eq.t_next);
    let (b2, b1, b0) = tsb_coefficients(eq.rhs, 0.0, eq.delta, kappa1, kappa2, kappa3, phi, psi)?;
    let roots = cardano_solve(b2, b1, b0);
    let inside = admissible_roots(&roots, phi, psi);
    match inside.as_slice() {
        [y] => Ok(refine(eq, *y, phi, psi)),
        _ => Err(Error::RootSelection {
            found: inside.len(),
            lower: phi,
            upper: psi,
        }),
    }
}

/// One or two safeguarded Newton steps on `g(y) = y − bΔ − z` itself; the
/// cubic is a rescaled form of `g`, so its root can be a few ulps off in `g`.
fn refine(eq: &ImplicitStepEquation<'_>, mut y: f64, phi: f64, psi: f64) -> f64 {
    let mut r = eq.residual(y);
    for _ in 0..2 {
        let dg = 1.0 - eq.delta * eq.drift.dy(eq.t_next, y);
        let next = y - r / dg;
        if !(next > phi && next < psi) {
            break;
        }
        let rn = eq.residual(next);
        if rn.abs() >= r.abs() {
            break;
        }
        y = next;
        r = rn;
    }
    y
}
