use std::f64::consts::PI;

const SERIES_CUTOFF: f64 = 1e-6;

/// `sin(omega * dt) / (pi * dt)`, continuous at `dt = 0` where it equals `omega / pi`.
pub fn sinc_kernel(omega: f64, dt: f64) -> f64 {
    let x = omega * dt;
    if x.abs() < SERIES_CUTOFF {
        omega / PI * (1.0 - x * x / 6.0)
    } else {
        x.sin() / (PI * dt)
    }
}
