//! Magnitude-to-height maps and the phase color wheel.

use std::f64::consts::TAU;

use super::{HeightMapKind, HeightMapSpec};

/// Height in [0, 1] for a magnitude `r ≥ 0`.
///
/// Infinite `r` gives 1 for the increasing maps and 0 for `ArctanRecip`;
/// `ArctanRecip` at `r = 0` takes its limit π/2, which clamps to 1.
pub fn height(spec: &HeightMapSpec, r: f64) -> f64 {
    if r.is_nan() {
        return 0.0;
    }
    let r = r.max(0.0);
    let h = match spec.kind {
        HeightMapKind::Tanh => r.tanh(),
        HeightMapKind::ArctanRecip => {
            if r == 0.0 {
                std::f64::consts::FRAC_PI_2
            } else {
                r.recip().atan()
            }
        }
        HeightMapKind::LogArctan => r.powf(spec.alpha).ln_1p().atan(),
    };
    h.clamp(0.0, 1.0)
}

/// Fully saturated HSV color with hue θ/2π; θ = 0 is red.
pub fn phase_to_color(theta: f64) -> [f64; 3] {
    let hue = (theta / TAU).rem_euclid(1.0);
    hsv_to_rgb(hue, 1.0, 1.0)
}

/// `hue` in [0, 1), `sat` and `val` in [0, 1].
pub fn hsv_to_rgb(hue: f64, sat: f64, val: f64) -> [f64; 3] {
    let h6 = hue * 6.0;
    let sector = h6.floor();
    let f = h6 - sector;
    let p = val * (1.0 - sat);
    let q = val * (1.0 - sat * f);
    let t = val * (1.0 - sat * (1.0 - f));
    match (sector as i64).rem_euclid(6) {
        0 => [val, t, p],
        1 => [q, val, p],
        2 => [p, val, t],
        3 => [p, q, val],
        4 => [t, p, val],
        _ => [val, p, q],
    }
}
