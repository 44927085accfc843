//! Packing and covering bounds for the energy-limited signal ellipsoid.
//!
//! All counts are reported as base-2 logarithms ("bits").

mod oracle;
mod pack;
mod report;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

pub use oracle::{
    oracle_cover_interval, oracle_pack_interval, verify_pairwise_distance_inequality, PairwiseCheck,
};
pub use pack::{greedy_pack, MAX_PACK_DIM};
pub use report::{bound_report, per_unit_time_report, rates, BoundReport, Quantity};

/// `log2` of the volume of a `dim`-ball of the given radius.
pub fn log_ball_volume(dim: usize, radius: f64) -> Result<f64> {
    if dim == 0 {
        return Err(Error::domain("ball dimension must be >= 1"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::domain(format!(
            "ball radius must be > 0, got {radius}"
        )));
    }
    Ok(log_unit_ball_volume(dim) + dim as f64 * radius.log2())
}

/// `log2(beta_N)`, the unit ball volume.
pub fn log_unit_ball_volume(dim: usize) -> f64 {
    let h = dim as f64 / 2.0;
    (h * std::f64::consts::PI.ln() - ln_gamma(h + 1.0)) / std::f64::consts::LN_2
}

/// Axis-aligned ellipsoid centred at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    radii: Vec<f64>,
}

impl Ellipsoid {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::domain("ellipsoid needs at least one semi-axis"));
        }
        if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(Error::domain(format!(
                "ellipsoid semi-axes must be > 0, got {r}"
            )));
        }
        Ok(Ellipsoid { radii })
    }

    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        Self::new(vec![radius; dim])
    }

    /// Semi-axes `sqrt(lambda_n E)` for the first `n` eigenvalues.
    pub fn from_spectrum(lambdas: &[f64], energy: f64, n: usize) -> Result<Self> {
        if n > lambdas.len() {
            return Err(Error::Range(format!(
                "ellipsoid of dimension {n} needs {n} eigenvalues, have {}",
                lambdas.len()
            )));
        }
        Self::new(lambdas[..n].iter().map(|l| (l * energy).sqrt()).collect())
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn dim(&self) -> usize {
        self.radii.len()
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        self.scaled_norm2(p) <= 1.0 + tol
    }

    pub fn scaled_norm2(&self, p: &[f64]) -> f64 {
        p.iter()
            .zip(&self.radii)
            .map(|(x, r)| (x / r) * (x / r))
            .sum()
    }
}

pub fn log_ellipsoid_volume(e: &Ellipsoid) -> f64 {
    log_unit_ball_volume(e.dim()) + e.radii.iter().map(|r| r.log2()).sum::<f64>()
}

/// Lower and upper bound on a log-count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower_bits: f64,
    pub upper_bits: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyBounds {
    pub lower_bits: f64,
    /// `None` where the covering term is undefined (`N <= 7`).
    pub upper_bits: Option<f64>,
    /// Inside the range `N >= 9`, `1 < sqrt(E)/eps < N / ln N`.
    pub valid: bool,
}

fn check_common(n: usize, zeta: f64, energy: f64, eps: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("dimension N must be >= 1"));
    }
    if !(zeta > 0.0 && zeta <= 1.0) {
        return Err(Error::domain(format!(
            "zeta must lie in (0, 1], got {zeta}"
        )));
    }
    if !(energy > 0.0 && eps > 0.0 && energy.is_finite() && eps.is_finite()) {
        return Err(Error::domain(format!(
            "energy and eps must be > 0, got E={energy}, eps={eps}"
        )));
    }
    Ok(energy.sqrt() / eps)
}

pub fn capacity_2eps_bounds(n: usize, zeta: f64, energy: f64, eps: f64) -> Result<Bounds> {
    let ratio = check_common(n, zeta, energy, eps)?;
    let nf = n as f64;
    let lower = nf * ((zeta * ratio).log2() - 1.0);
    let upper = nf * (1.0 + ratio / std::f64::consts::SQRT_2).log2() + (1.0 + nf / 2.0).log2();
    Ok(Bounds {
        lower_bits: lower.max(0.0),
        upper_bits: upper,
    })
}

pub fn capacity_eps_delta_bounds(
    n: usize,
    zeta: f64,
    energy: f64,
    eps: f64,
    delta: f64,
) -> Result<Bounds> {
    let ratio = check_common(n, zeta, energy, eps)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let nf = n as f64;
    let lower = nf * (zeta * ratio).log2() + delta.log2();
    let upper = nf * (1.0 + ratio).log2() - (1.0 - delta).log2();
    Ok(Bounds {
        lower_bits: lower.max(0.0),
        upper_bits: upper,
    })
}

/// Covering-density term of the entropy upper bound; undefined for `N <= 7`.
pub fn rogers_eta(n: usize) -> Option<f64> {
    let nf = n as f64;
    let ln = nf.ln();
    if ln <= 2.0 {
        return None;
    }
    Some((4.0 * std::f64::consts::E * nf.powf(1.5) / (ln - 2.0) * nf * ln).log2())
}

pub fn rogers_range_valid(n: usize, ratio: f64) -> bool {
    let nf = n as f64;
    n >= 9 && ratio > 1.0 && ratio < nf / nf.ln()
}

pub fn entropy_eps_bounds(n: usize, zeta: f64, energy: f64, eps: f64) -> Result<EntropyBounds> {
    let ratio = check_common(n, zeta, energy, eps)?;
    let nf = n as f64;
    let lower = (nf * (zeta * ratio).log2()).max(0.0);
    let upper = rogers_eta(n).map(|eta| (nf * ratio.log2() + eta).max(0.0));
    Ok(EntropyBounds {
        lower_bits: lower,
        upper_bits: upper,
        valid: rogers_range_valid(n, ratio),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn ball_volumes() {
        assert!(close(log_ball_volume(1, 1.0).unwrap(), 1.0, 1e-14));
        assert!(close(
            log_ball_volume(2, 1.0).unwrap(),
            std::f64::consts::PI.log2(),
            1e-14
        ));
        let want = (32.0 * std::f64::consts::PI / 3.0).log2();
        assert!(close(log_ball_volume(3, 2.0).unwrap(), want, 1e-13));
        assert!(log_ball_volume(1_000_000, 1.0).unwrap().is_finite());
        assert!(log_ball_volume(0, 1.0).is_err());
        assert!(log_ball_volume(2, 0.0).is_err());
    }

    #[test]
    fn ellipsoid_volumes() {
        let e = Ellipsoid::new(vec![2.0, 1.0]).unwrap();
        assert!(close(
            log_ellipsoid_volume(&e),
            (2.0 * std::f64::consts::PI).log2(),
            1e-14
        ));
        let b = Ellipsoid::ball(5, 1.7).unwrap();
        assert!(close(
            log_ellipsoid_volume(&b),
            log_ball_volume(5, 1.7).unwrap(),
            1e-12
        ));
        assert!(Ellipsoid::new(vec![]).is_err());
        assert!(Ellipsoid::new(vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn ellipsoid_from_spectrum_matches_zeta_identity() {
        let lambdas = [0.99, 0.9, 0.6, 0.2];
        let energy = 3.0;
        let e = Ellipsoid::from_spectrum(&lambdas, energy, 4).unwrap();
        let zeta = crate::spectrum::zeta(&lambdas, 4).unwrap();
        let want = log_unit_ball_volume(4) + 4.0 * (zeta * energy.sqrt()).log2();
        assert!(close(log_ellipsoid_volume(&e), want, 1e-12));
    }

    #[test]
    fn capacity_2eps_examples() {
        let b = capacity_2eps_bounds(2, 1.0, 4.0, 1.0).unwrap();
        assert_eq!(b.lower_bits, 0.0);
        assert!(close(
            b.upper_bits,
            2.0 * (1.0 + 2f64.sqrt()).log2() + 1.0,
            1e-12
        ));
        assert!(close(b.upper_bits, 3.543, 1e-3));
        let b = capacity_2eps_bounds(1, 1.0, 4.0, 1.0).unwrap();
        assert_eq!(b.lower_bits, 0.0);
        assert!(close(
            b.upper_bits,
            (1.0 + 2f64.sqrt()).log2() + 1.5f64.log2(),
            1e-12
        ));
    }

    #[test]
    fn capacity_2eps_gap_per_dimension_tends_to_half() {
        let n = 10;
        let b = capacity_2eps_bounds(n, 1.0, 1e16, 1.0).unwrap();
        let per_dim = (b.upper_bits - b.lower_bits - (1.0 + n as f64 / 2.0).log2()) / n as f64;
        assert!(close(per_dim, 0.5, 1e-6), "{per_dim}");
    }

    #[test]
    fn capacity_eps_delta_examples() {
        let b = capacity_eps_delta_bounds(10, 1.0, 16.0, 1.0, 0.5).unwrap();
        assert!(close(b.lower_bits, 19.0, 1e-12));
        assert!(close(b.upper_bits, 10.0 * 5f64.log2() + 1.0, 1e-12));
        assert!(close(b.upper_bits, 24.22, 1e-2));
        assert!(matches!(
            capacity_eps_delta_bounds(10, 1.0, 16.0, 1.0, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(capacity_eps_delta_bounds(10, 1.0, 16.0, 1.0, 1.0).is_err());
        let near_one = capacity_eps_delta_bounds(10, 1.0, 16.0, 1.0, 1.0 - 1e-12).unwrap();
        assert!(near_one.upper_bits > b.upper_bits + 30.0);
    }

    #[test]
    fn entropy_examples() {
        let e = entropy_eps_bounds(16, 1.0, 4.0, 1.0).unwrap();
        assert!(close(e.lower_bits, 16.0, 1e-12));
        assert!(close(
            e.upper_bits.unwrap(),
            16.0 + rogers_eta(16).unwrap(),
            1e-12
        ));
        assert!(e.valid);
        assert_eq!(
            entropy_eps_bounds(16, 1.0, 1.0, 1.0).unwrap().lower_bits,
            0.0
        );
        let e8 = entropy_eps_bounds(8, 1.0, 4.0, 1.0).unwrap();
        assert!(!e8.valid);
        assert!(e8.upper_bits.is_some());
        assert!(entropy_eps_bounds(7, 1.0, 4.0, 1.0)
            .unwrap()
            .upper_bits
            .is_none());
    }

    #[test]
    fn eta_formula() {
        let n = 100f64;
        let want = (4.0 * std::f64::consts::E * n.powf(1.5) / (n.ln() - 2.0) * n * n.ln()).log2();
        assert!(close(rogers_eta(100).unwrap(), want, 1e-12));
        assert!(rogers_eta(1).is_none());
    }

    #[test]
    fn rejects_bad_zeta() {
        assert!(capacity_2eps_bounds(2, 0.0, 1.0, 1.0).is_err());
        assert!(capacity_2eps_bounds(2, 1.5, 1.0, 1.0).is_err());
        assert!(capacity_2eps_bounds(0, 1.0, 1.0, 1.0).is_err());
    }
}
