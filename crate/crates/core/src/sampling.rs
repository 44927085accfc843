//! Uniform sampling in balls and axis-aligned ellipsoids.

use rand::Rng;
use rand_distr::StandardNormal;

/// Overwrite `out` with a point uniform in the ball of the given radius
/// centred at the origin.
pub fn fill_uniform_ball<R: Rng + ?Sized>(out: &mut [f64], radius: f64, rng: &mut R) {
    let dim = out.len();
    if dim == 0 {
        return;
    }
    let norm2 = loop {
        let mut s = 0.0;
        for v in out.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *v = z;
            s += z * z;
        }
        if s > 0.0 {
            break s;
        }
    };
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / dim as f64);
    let scale = r / norm2.sqrt();
    for v in out.iter_mut() {
        *v *= scale;
    }
}

pub fn sample_uniform_ball<R: Rng + ?Sized>(dim: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    let mut p = vec![0.0; dim];
    fill_uniform_ball(&mut p, radius, rng);
    p
}

/// Uniform point in the ellipsoid with the given semi-axes.
pub fn sample_uniform_ellipsoid<R: Rng + ?Sized>(radii: &[f64], rng: &mut R) -> Vec<f64> {
    let mut p = sample_uniform_ball(radii.len(), 1.0, rng);
    for (v, r) in p.iter_mut().zip(radii) {
        *v *= r;
    }
    p
}
