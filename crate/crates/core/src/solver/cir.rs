/// Positive root of `(1+κ₂Δ)y² − zy − κ₁Δ = 0`, `z = y_prev + dz`: the
/// implicit step for `κ₁/y − κ₂y`.
///
/// For `z < 0` the conjugate form `2κ₁Δ/(√D − z)` avoids cancellation.
#[inline]
pub fn implicit_step_cir(y_prev: f64, delta: f64, dz: f64, kappa1: f64, kappa2: f64) -> f64 {
    let z = y_prev + dz;
    let a = 1.0 + kappa2 * delta;
    let c = kappa1 * delta;
    let sqrt_d = (z * z + 4.0 * c * a).sqrt();
    if z >= 0.0 {
        (z + sqrt_d) / (2.0 * a)
    } else {
        2.0 * c / (sqrt_d - z)
    }
}
