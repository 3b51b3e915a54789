#![allow(dead_code)]

use sandwich_core::model::{BoundFn, BoundFunctions, DriftSpec, SandwichConfig};
use sandwich_core::noise::{GaussianDriverSpec, HurstFn};

/// The generalized CIR drift with φ ≡ 0.
pub fn cir(kappa1: f64, kappa2: f64, gamma: f64, lambda: f64, y0: f64, n: usize) -> SandwichConfig {
    let b = BoundFunctions::one_sided(BoundFn::Const(0.0), lambda, None, 1.0).unwrap();
    SandwichConfig::new(y0, DriftSpec::cir(kappa1, kappa2, gamma, b).unwrap(), n).unwrap()
}

/// The TSB drift between −1 and 1.
pub fn tsb(kappa1: f64, kappa2: f64, kappa3: f64, lambda: f64, y0: f64, n: usize) -> SandwichConfig {
    let b = BoundFunctions::two_sided(BoundFn::Const(-1.0), BoundFn::Const(1.0), lambda, None, 1.0)
        .unwrap();
    SandwichConfig::new(y0, DriftSpec::tsb(kappa1, kappa2, kappa3, b).unwrap(), n).unwrap()
}

/// Power sandwich with γ = 4 between `sin(10t)` and `sin(10t) + 2`.
pub fn power(lambda: f64, n: usize) -> SandwichConfig {
    let phi = BoundFn::SinShift {
        offset: 0.0,
        amplitude: 1.0,
        frequency: 10.0,
    };
    let psi = BoundFn::SinShift {
        offset: 2.0,
        amplitude: 1.0,
        frequency: 10.0,
    };
    let b = BoundFunctions::two_sided(phi, psi, lambda, None, 1.0).unwrap();
    SandwichConfig::new(1.0, DriftSpec::power_sandwich(1.0, 1.0, 0.0, 4.0, b).unwrap(), n).unwrap()
}

/// `H(t) = 1/2 + sin(2πt)/5`.
pub fn sine_hurst() -> HurstFn {
    HurstFn::SinShift {
        offset: 0.5,
        amplitude: 0.2,
        frequency: 2.0 * std::f64::consts::PI,
    }
}

pub fn mbm_driver() -> GaussianDriverSpec {
    GaussianDriverSpec::mbm(sine_hurst())
}

/// Root of an increasing `g` on `(lo, hi)` by plain bisection, `hi` possibly
/// infinite; `g` must tend to `−∞` at `lo⁺` and `+∞` at `hi⁻`.
pub fn bisect(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let start = if hi.is_finite() { 0.5 * (lo + hi) } else { lo + 1.0 };
    let mut a = start;
    while g(a) > 0.0 {
        let next = lo + 0.5 * (a - lo);
        if next <= lo {
            return a;
        }
        a = next;
    }
    let mut b = start;
    while g(b) < 0.0 {
        let next = if hi.is_finite() { hi - 0.5 * (hi - b) } else { lo + 2.0 * (b - lo) };
        if next >= hi {
            return b;
        }
        b = next;
    }
    for _ in 0..3000 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if g(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    if g(a).abs() < g(b).abs() {
        a
    } else {
        b
    }
}
