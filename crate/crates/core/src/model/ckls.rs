use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::noise::TimeGrid;
use crate::solver::SimulatedPath;

/// `X = Y^{1+γ}` on the grid of a one-sided path, with elasticity
/// `α = γ/(1+γ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CklsPath {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub gamma: f64,
    pub alpha: f64,
}

pub fn ckls_transform(path: &SimulatedPath, gamma: f64) -> Result<CklsPath> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(invalid(format!("γ = {gamma} must be finite and non-negative")));
    }
    let power = 1.0 + gamma;
    let mut values = Vec::with_capacity(path.values.len());
    for (k, &y) in path.values.iter().enumerate() {
        if !(y > 0.0) {
            return Err(Error::Domain {
                t: path.grid.time(k),
                y,
                reason: "the power transform needs strictly positive values".into(),
            });
        }
        values.push(if gamma == 0.0 {
            y
        } else if gamma == 1.0 {
            y * y
        } else {
            y.powf(power)
        });
    }
    Ok(CklsPath {
        grid: path.grid.clone(),
        values,
        gamma,
        alpha: gamma / power,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::StepperKind;

    fn path(values: Vec<f64>) -> SimulatedPath {
        SimulatedPath {
            grid: TimeGrid::new(1.0, values.len() - 1).unwrap(),
            values,
            noise_seed: 0,
            stepper: StepperKind::BracketedGeneric,
            residuals: Vec::new(),
        }
    }

    #[test]
    fn squares_at_gamma_one() {
        let x = ckls_transform(&path(vec![1.0, 2.0]), 1.0).unwrap();
        assert_eq!(x.values, vec![1.0, 4.0]);
        assert_eq!(x.alpha, 0.5);
    }

    #[test]
    fn identity_at_gamma_zero() {
        let p = path(vec![0.3, 1.7, 2.2]);
        let x = ckls_transform(&p, 0.0).unwrap();
        assert_eq!(x.values, p.values);
        assert_eq!(x.alpha, 0.0);
    }

    #[test]
    fn general_power() {
        let x = ckls_transform(&path(vec![2.0, 0.5]), 2.5).unwrap();
        assert!((x.values[0] - 2f64.powf(3.5)).abs() < 1e-14);
        assert!((x.alpha - 2.5 / 3.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_positive_values() {
        assert!(matches!(
            ckls_transform(&path(vec![1.0, 0.0]), 1.0),
            Err(Error::Domain { .. })
        ));
        assert!(ckls_transform(&path(vec![1.0, 1.0]), -0.5).is_err());
    }
}
