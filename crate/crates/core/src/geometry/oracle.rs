use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ceil_snapped, floor_snapped};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairwiseCheck {
    pub holds: bool,
    /// `sum_{j,k} |x_j - x_k|^2` over ordered pairs.
    pub lhs: f64,
    /// `2m sum_j |x - x_j|^2`.
    pub rhs: f64,
    pub slack: f64,
}

/// Checks `sum_{j,k} |x_j - x_k|^2 <= 2m sum_j |x - x_j|^2` for `m` points.
pub fn verify_pairwise_distance_inequality(
    center: &[f64],
    points: &[Vec<f64>],
) -> Result<PairwiseCheck> {
    if points.is_empty() {
        return Err(Error::domain("need at least one point"));
    }
    let d = center.len();
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(Error::domain(format!(
            "dimension mismatch: centre has {d} coordinates, point has {}",
            p.len()
        )));
    }
    let dist2 =
        |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum() };
    let m = points.len() as f64;
    let mut lhs = 0.0;
    for a in points {
        for b in points {
            lhs += dist2(a, b);
        }
    }
    let rhs = 2.0 * m * points.iter().map(|p| dist2(center, p)).sum::<f64>();
    let tol = 1e-12 * rhs.abs().max(lhs.abs()).max(f64::MIN_POSITIVE);
    Ok(PairwiseCheck {
        holds: lhs <= rhs + tol,
        lhs,
        rhs,
        slack: rhs - lhs,
    })
}

fn check_interval_args(sqrt_energy: f64, eps: f64) -> Result<f64> {
    if !(sqrt_energy > 0.0 && eps > 0.0 && sqrt_energy.is_finite() && eps.is_finite()) {
        return Err(Error::domain(format!(
            "sqrt_energy and eps must be > 0, got {sqrt_energy}, {eps}"
        )));
    }
    Ok(sqrt_energy / eps)
}

/// Most points in `[-sqrt(E), sqrt(E)]` with pairwise spacing at least `2 eps`.
pub fn oracle_pack_interval(sqrt_energy: f64, eps: f64) -> Result<u64> {
    let r = check_interval_args(sqrt_energy, eps)?;
    Ok(floor_snapped(r) as u64 + 1)
}

/// Fewest radius-`eps` intervals covering `[-sqrt(E), sqrt(E)]`.
pub fn oracle_cover_interval(sqrt_energy: f64, eps: f64) -> Result<u64> {
    let r = check_interval_args(sqrt_energy, eps)?;
    Ok(ceil_snapped(r).max(1) as u64)
}
