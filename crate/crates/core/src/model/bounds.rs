use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};

/// Sample count used when a bound has no closed-form extremes.
const SAMPLES: usize = 4097;

/// A deterministic bound `φ` or `ψ` on `[0, T]`.
#[derive(Clone)]
pub enum BoundFn {
    /// `t ↦ c`
    Const(f64),
    /// `t ↦ offset + amplitude · sin(frequency · t)`
    SinShift {
        offset: f64,
        amplitude: f64,
        frequency: f64,
    },
    /// Caller-supplied function. Its Hölder constant must be given explicitly.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for BoundFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundFn::Const(c) => f.debug_tuple("Const").field(c).finish(),
            BoundFn::SinShift {
                offset,
                amplitude,
                frequency,
            } => f
                .debug_struct("SinShift")
                .field("offset", offset)
                .field("amplitude", amplitude)
                .field("frequency", frequency)
                .finish(),
            BoundFn::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl BoundFn {
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            BoundFn::Const(c) => *c,
            BoundFn::SinShift {
                offset,
                amplitude,
                frequency,
            } => offset + amplitude * (frequency * t).sin(),
            BoundFn::Custom(f) => f(t),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, BoundFn::Const(c) if *c == 0.0)
    }

    /// Smallest `K` with `|f(t) − f(s)| ≤ K|t − s|^λ` on `[0, T]`, when known
    /// in closed form.
    ///
    /// For `b·sin(ct)` the increment is bounded by `|b|·min(2, |c|h)`, whose
    /// ratio to `h^λ` peaks at `h = min(2/|c|, T)`.
    pub fn holder_constant(&self, lambda: f64, horizon: f64) -> Option<f64> {
        match self {
            BoundFn::Const(_) => Some(0.0),
            BoundFn::SinShift {
                amplitude,
                frequency,
                ..
            } => {
                let (b, c) = (amplitude.abs(), frequency.abs());
                if b == 0.0 || c == 0.0 {
                    return Some(0.0);
                }
                let h = (2.0 / c).min(horizon);
                Some(b * c * h.powf(1.0 - lambda))
            }
            BoundFn::Custom(_) => None,
        }
    }

    /// `(min, max)` over `[0, T]`. Exact for the built-in shapes, sampled on
    /// a uniform lattice otherwise.
    pub fn extremes(&self, horizon: f64) -> (f64, f64) {
        match self {
            BoundFn::Const(c) => (*c, *c),
            BoundFn::SinShift {
                amplitude,
                frequency,
                ..
            } => {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                let mut visit = |t: f64| {
                    let v = self.eval(t);
                    lo = lo.min(v);
                    hi = hi.max(v);
                };
                visit(0.0);
                visit(horizon);
                let c = frequency.abs();
                if c > 0.0 && *amplitude != 0.0 {
                    // critical points of sin(ct): ct = π/2 + kπ
                    let mut k = 0.0;
                    loop {
                        let t = (PI / 2.0 + k * PI) / c;
                        if t > horizon {
                            break;
                        }
                        visit(t);
                        k += 1.0;
                    }
                }
                (lo, hi)
            }
            BoundFn::Custom(_) => sampled_extremes(|t| self.eval(t), horizon),
        }
    }

    /// `self − other` in closed form when both are built-in shapes sharing a
    /// frequency, so that its extremes stay exact.
    pub fn minus(&self, other: &BoundFn) -> Option<BoundFn> {
        use BoundFn::*;
        match (self, other) {
            (Const(a), Const(b)) => Some(Const(a - b)),
            (
                SinShift {
                    offset,
                    amplitude,
                    frequency,
                },
                Const(b),
            ) => Some(SinShift {
                offset: offset - b,
                amplitude: *amplitude,
                frequency: *frequency,
            }),
            (
                Const(a),
                SinShift {
                    offset,
                    amplitude,
                    frequency,
                },
            ) => Some(SinShift {
                offset: a - offset,
                amplitude: -amplitude,
                frequency: *frequency,
            }),
            (
                SinShift {
                    offset: o1,
                    amplitude: a1,
                    frequency: f1,
                },
                SinShift {
                    offset: o2,
                    amplitude: a2,
                    frequency: f2,
                },
            ) if f1 == f2 => Some(SinShift {
                offset: o1 - o2,
                amplitude: a1 - a2,
                frequency: *f1,
            }),
            _ => None,
        }
    }
}

fn sampled_extremes(f: impl Fn(f64) -> f64, horizon: f64) -> (f64, f64) {
    (0..SAMPLES)
        .map(|i| f(horizon * i as f64 / (SAMPLES - 1) as f64))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
}

/// The sandwich bounds `φ` (and `ψ`, two-sided) with their joint Hölder
/// exponent `λ` and constant `K` on `[0, T]`.
#[derive(Clone, Debug)]
pub struct BoundFunctions {
    phi: BoundFn,
    psi: Option<BoundFn>,
    holder_exponent: f64,
    holder_constant: f64,
    horizon: f64,
}

impl BoundFunctions {
    /// Lower bound only. `holder_constant = None` uses the closed form.
    pub fn one_sided(
        phi: BoundFn,
        holder_exponent: f64,
        holder_constant: Option<f64>,
        horizon: f64,
    ) -> Result<Self> {
        Self::build(phi, None, holder_exponent, holder_constant, horizon)
    }

    pub fn two_sided(
        phi: BoundFn,
        psi: BoundFn,
        holder_exponent: f64,
        holder_constant: Option<f64>,
        horizon: f64,
    ) -> Result<Self> {
        Self::build(phi, Some(psi), holder_exponent, holder_constant, horizon)
    }

    fn build(
        phi: BoundFn,
        psi: Option<BoundFn>,
        lambda: f64,
        k: Option<f64>,
        horizon: f64,
    ) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(invalid(format!("Hölder exponent {lambda} must lie in (0, 1)")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid(format!("horizon T={horizon} must be positive")));
        }
        let k = match k {
            Some(k) => k,
            None => {
                let kp = phi.holder_constant(lambda, horizon);
                let ks = match &psi {
                    Some(psi) => psi.holder_constant(lambda, horizon),
                    None => Some(0.0),
                };
                match (kp, ks) {
                    (Some(a), Some(b)) => a + b,
                    _ => {
                        return Err(invalid(
                            "custom bound functions need an explicit Hölder constant K",
                        ))
                    }
                }
            }
        };
        if !(k >= 0.0 && k.is_finite()) {
            return Err(invalid(format!("Hölder constant K={k} must be non-negative")));
        }
        let bounds = BoundFunctions {
            phi,
            psi,
            holder_exponent: lambda,
            holder_constant: k,
            horizon,
        };
        if bounds.psi.is_some() {
            let gap = bounds.min_gap();
            if !(gap > 0.0) {
                return Err(invalid(format!(
                    "lower bound must stay strictly below the upper bound (min ψ−φ = {gap})"
                )));
            }
        }
        Ok(bounds)
    }

    #[inline]
    pub fn phi(&self, t: f64) -> f64 {
        self.phi.eval(t)
    }

    #[inline]
    pub fn psi(&self, t: f64) -> Option<f64> {
        self.psi.as_ref().map(|p| p.eval(t))
    }

    pub fn phi_fn(&self) -> &BoundFn {
        &self.phi
    }

    pub fn psi_fn(&self) -> Option<&BoundFn> {
        self.psi.as_ref()
    }

    pub fn is_two_sided(&self) -> bool {
        self.psi.is_some()
    }

    pub fn holder_exponent(&self) -> f64 {
        self.holder_exponent
    }

    pub fn holder_constant(&self) -> f64 {
        self.holder_constant
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `min_t (ψ(t) − φ(t))`; infinite in the one-sided case.
    pub fn min_gap(&self) -> f64 {
        match &self.psi {
            None => f64::INFINITY,
            Some(psi) => match psi.minus(&self.phi) {
                Some(diff) => diff.extremes(self.horizon).0,
                None => sampled_extremes(|t| psi.eval(t) - self.phi.eval(t), self.horizon).0,
            },
        }
    }

    /// `max_t |φ(t)|`, or `max_t max(|φ(t)|, |ψ(t)|)` when two-sided.
    pub fn max_abs(&self) -> f64 {
        let (lo, hi) = self.phi.extremes(self.horizon);
        let mut m = lo.abs().max(hi.abs());
        if let Some(psi) = &self.psi {
            let (lo, hi) = psi.extremes(self.horizon);
            m = m.max(lo.abs()).max(hi.abs());
        }
        m
    }
}
