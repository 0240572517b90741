//! Scaled complementary error function.

use std::f64::consts::PI;

/// Above this argument `exp(w^2) * erfc(w)` is evaluated by its asymptotic
/// series; below it the direct product is still representable.
const ASYMPTOTIC_FROM: f64 = 25.0;

/// `erfcx(w) = exp(w^2) * erfc(w)`, finite for all `w` with `exp(w^2)` finite.
pub fn erfcx(w: f64) -> f64 {
    if w.is_nan() {
        return f64::NAN;
    }
    if w < 0.0 {
        return 2.0 * (w * w).exp() - erfcx(-w);
    }
    if w < ASYMPTOTIC_FROM {
        return (w * w).exp() * libm::erfc(w);
    }
    // 1/(w sqrt(pi)) * sum_n (-1)^n (2n-1)!! / (2 w^2)^n
    let inv = 1.0 / (2.0 * w * w);
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 1..8 {
        term *= -((2 * n - 1) as f64) * inv;
        sum += term;
    }
    sum / (w * PI.sqrt())
}
