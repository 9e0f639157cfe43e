//! Shared smooth cutoff profiles.
//!
//! Everything here is built from the `exp(-b/t)` ramp, so plateaus are exact
//! (the ramp reaches 0 and 1 in floating point, not just asymptotically).

/// Ramp steepness. Larger values push Fourier tails down faster at fixed
/// support, which the wave-packet envelope bounds rely on.
const RAMP_B: f64 = 2.0;

fn e(t: f64) -> f64 {
    if t > 0.0 {
        (-RAMP_B / t).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for `u <= 0`, 1 for `u >= 1`, C^infinity in between.
pub fn smooth_step(u: f64) -> f64 {
    smooth_step_b(u, RAMP_B)
}

/// Smooth step with explicit ramp steepness.
pub fn smooth_step_b(u: f64, b: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let eb = |t: f64| (-b / t).exp();
        let a = eb(u);
        a / (a + eb(1.0 - u))
    }
}

/// Radial transition: 1 for `r <= 1`, 0 for `r >= 2`.
pub fn theta(r: f64) -> f64 {
    smooth_step(2.0 - r)
}

/// Smooth window on `[a, b]`: 0 outside, exactly 1 on the middle plateau
/// `[a + ramp, b - ramp]` where `ramp = (b - a) * ramp_frac`.
pub fn window(x: f64, a: f64, b: f64, ramp_frac: f64) -> f64 {
    window_b(x, a, b, ramp_frac, RAMP_B)
}

/// Window with explicit ramp steepness. `ramp_frac = 1/2` gives a plateau-free
/// bump, the most space-concentrated member of the family at fixed support.
pub fn window_b(x: f64, a: f64, b: f64, ramp_frac: f64, steep: f64) -> f64 {
    if x <= a || x >= b {
        return 0.0;
    }
    let ramp = (b - a) * ramp_frac;
    smooth_step_b((x - a) / ramp, steep) * smooth_step_b((b - x) / ramp, steep)
}
