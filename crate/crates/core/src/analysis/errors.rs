use crate::error::{Error, Result};
use crate::model::BoundFunctions;
use crate::solver::SimulatedPath;

/// Smallest distance to a bound accepted by the reciprocal error.
const MIN_DISTANCE: f64 = 1e-300;

fn nesting(coarse: &SimulatedPath, reference: &SimulatedPath) -> Result<usize> {
    let (n, m) = (coarse.grid.steps(), reference.grid.steps());
    if coarse.grid.horizon() != reference.grid.horizon() || m % n != 0 {
        return Err(Error::NotNested { coarse: n, fine: m });
    }
    Ok(m / n)
}

/// `max_i |Y_ref(s_i) − Ŷ(s_i)|` over the fine grid, with `Ŷ` extended
/// piecewise constantly.
pub fn sup_error(coarse: &SimulatedPath, reference: &SimulatedPath) -> Result<f64> {
    let factor = nesting(coarse, reference)?;
    Ok(reference
        .values
        .iter()
        .enumerate()
        .map(|(i, &y)| (y - coarse.values[i / factor]).abs())
        .fold(0.0, f64::max))
}

/// Sup over coarse grid points of `|1/(Y−φ) − 1/(Ŷ−φ)|` and, two-sided,
/// `|1/(ψ−Y) − 1/(ψ−Ŷ)|`.
pub fn inverse_distance_error(
    coarse: &SimulatedPath,
    reference: &SimulatedPath,
    bounds: &BoundFunctions,
) -> Result<(f64, Option<f64>)> {
    let factor = nesting(coarse, reference)?;
    let mut lower = 0.0f64;
    let mut upper = bounds.is_two_sided().then_some(0.0f64);
    for (k, &y_hat) in coarse.values.iter().enumerate() {
        let t = coarse.grid.time(k);
        let y = reference.values[k * factor];
        let phi = bounds.phi(t);
        let (a, b) = (y - phi, y_hat - phi);
        if !(a >= MIN_DISTANCE && b >= MIN_DISTANCE) {
            return Err(Error::Domain {
                t,
                y: if a < b { y } else { y_hat },
                reason: "too close to the lower bound for a reciprocal error".into(),
            });
        }
        lower = lower.max((1.0 / a - 1.0 / b).abs());
        if let (Some(u), Some(psi)) = (upper.as_mut(), bounds.psi(t)) {
            let (a, b) = (psi - y, psi - y_hat);
            if !(a >= MIN_DISTANCE && b >= MIN_DISTANCE) {
                return Err(Error::Domain {
                    t,
                    y: if a < b { y } else { y_hat },
                    reason: "too close to the upper bound for a reciprocal error".into(),
                });
            }
            *u = u.max((1.0 / a - 1.0 / b).abs());
        }
    }
    Ok((lower, upper))
}
