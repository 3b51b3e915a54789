use super::ImplicitStepEquation;
use crate::error::{Error, Result};

/// Upper-bracket doublings allowed in the one-sided case.
const MAX_EXPANSIONS: i32 = 64;
const MAX_ITERATIONS: usize = 400;

/// Solves `g(y) = y − b(t,y)Δ = z` for any admissible drift.
///
/// `g` is strictly increasing on the domain with `g → −∞` at `φ⁺` (and
/// `+∞` at `ψ⁻`), so a bracket always exists. Lower (and two-sided upper)
/// bracket points approach the bound by halving the distance from an interior
/// start, so `φ` and `ψ` themselves are never evaluated; the one-sided upper
/// point is `max(y_prev, φ+1) + 2^j`, `j ≤ 64`. Inside the bracket a Newton
/// step is taken when it stays strictly inside, else bisection.
pub fn implicit_step_generic(eq: &ImplicitStepEquation<'_>, tol: f64) -> Result<f64> {
    let (phi, psi) = eq.drift.interval(eq.t_next);
    let z = eq.rhs;
    let target = tol * z.abs().max(1.0);
    let g = |y: f64| eq.residual(y);

    let start = if z > phi && z < psi {
        z
    } else if psi.is_finite() {
        0.5 * (phi + psi)
    } else {
        phi + 1.0
    };
    let g0 = g(start);
    if g0.abs() <= target {
        return Ok(start);
    }

    let (mut lo, mut hi, mut glo, mut ghi);
    if g0 < 0.0 {
        lo = start;
        glo = g0;
        let mut found = None;
        if psi.is_finite() {
            let mut gap = psi - start;
            loop {
                gap *= 0.5;
                let y = psi - gap;
                if !(y > lo && y < psi) {
                    break;
                }
                let gy = g(y);
                if gy >= 0.0 {
                    found = Some((y, gy));
                    break;
                }
                lo = y;
                glo = gy;
            }
        } else {
            let base = eq.y_prev.max(phi + 1.0).max(start);
            for j in 0..=MAX_EXPANSIONS {
                let y = base + 2f64.powi(j);
                let gy = g(y);
                if gy >= 0.0 {
                    found = Some((y, gy));
                    break;
                }
                lo = y;
                glo = gy;
            }
        }
        let Some((y, gy)) = found else {
            return Err(Error::Bracket {
                lo,
                hi: if psi.is_finite() { psi } else { lo },
                target: z,
            });
        };
        hi = y;
        ghi = gy;
    } else {
        hi = start;
        ghi = g0;
        let mut gap = start - phi;
        loop {
            gap *= 0.5;
            let y = phi + gap;
            if !(y > phi && y < hi) {
                return Err(Error::Bracket { lo: phi, hi, target: z });
            }
            let gy = g(y);
            if gy <= 0.0 {
                lo = y;
                glo = gy;
                break;
            }
            hi = y;
            ghi = gy;
        }
    }
    if glo.abs() <= target {
        return Ok(lo);
    }
    if ghi.abs() <= target {
        return Ok(hi);
    }

    // safeguarded Newton from the bracket end with the smaller residual
    let (mut y, mut gy) = if glo.abs() < ghi.abs() { (lo, glo) } else { (hi, ghi) };
    let mut best = (y, gy);
    for _ in 0..MAX_ITERATIONS {
        let dg = 1.0 - eq.delta * eq.drift.dy(eq.t_next, y);
        let newton = y - gy / dg;
        let next = if dg > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if !(next > lo && next < hi) {
            break;
        }
        y = next;
        gy = g(y);
        if gy.abs() < best.1.abs() {
            best = (y, gy);
        }
        if gy.abs() <= target {
            return Ok(y);
        }
        if gy < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BoundFn, BoundFunctions, DriftSpec};

    fn eq<'a>(drift: &'a DriftSpec, rhs: f64, y_prev: f64, delta: f64) -> ImplicitStepEquation<'a> {
        ImplicitStepEquation {
            t_next: 0.5,
            delta,
            rhs,
            y_prev,
            drift,
        }
    }

    #[test]
    fn matches_closed_form_cir() {
        let b = BoundFunctions::one_sided(BoundFn::Const(0.0), 0.49, None, 1.0).unwrap();
        let d = DriftSpec::cir(0.7, 1.3, 1.0, b).unwrap();
        for &(y, dz) in &[(1.0, 0.0), (0.01, -0.5), (3.0, 2.0), (0.5, -20.0), (1e-6, 0.0)] {
            let e = eq(&d, y + dz, y, 0.01);
            let g = implicit_step_generic(&e, 1e-13).unwrap();
            let c = super::super::implicit_step_cir(y, 0.01, dz, 0.7, 1.3);
            assert!((g - c).abs() <= 1e-10 * c.max(1.0), "{y} {dz}: {g} vs {c}");
        }
    }

    #[test]
    fn far_right_hand_sides_stay_inside() {
        let b = BoundFunctions::two_sided(BoundFn::Const(-1.0), BoundFn::Const(1.0), 0.45, None, 1.0)
            .unwrap();
        let d = DriftSpec::power_sandwich(1.0, 1.0, 0.5, 3.0, b).unwrap();
        for z in [-1e6, -3.0, -0.999, 0.0, 0.4, 2.0, 1e6] {
            let y = implicit_step_generic(&eq(&d, z, 0.0, 0.01), 1e-12).unwrap();
            assert!(y > -1.0 && y < 1.0, "z = {z}: {y}");
            assert!(eq(&d, z, 0.0, 0.01).residual(y).abs() <= 1e-12 * z.abs().max(1.0) * 10.0);
        }
    }

    #[test]
    fn one_sided_large_target_expands_the_bracket() {
        let b = BoundFunctions::one_sided(BoundFn::Const(0.0), 0.49, None, 1.0).unwrap();
        let d = DriftSpec::cir(1.0, 1.0, 2.0, b).unwrap();
        let y = implicit_step_generic(&eq(&d, 1e8, 1.0, 0.001), 1e-12).unwrap();
        assert!((y - 1e8 / 1.001).abs() < 1e-3);
    }
}
