//! Random codebooks on the signal ellipsoid and Monte Carlo estimates of
//! their error measure under uniform bounded noise.

mod estimate;
mod experiment;
pub mod neighbors;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

pub use crate::sampling::{sample_uniform_ball, sample_uniform_ellipsoid};
pub use estimate::{
    cap_fraction, estimate_delta, estimate_delta_with, wilson_interval, CodewordEstimate,
    SimulationResult, Strategy, MIN_SAMPLES,
};
pub use experiment::{
    empirical_exponent_sweep, fitted_slope, run_theorem2_experiment, CodebookGeometry,
    CodebookSize, ExperimentConfig, ExperimentOutcome, ExponentSweep, SweepRow,
    DEFAULT_MAX_CODEWORDS, DEFAULT_RETRIES,
};

const INSIDE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodebookMethod {
    UniformRandom,
    Explicit,
}

/// `M` codewords of dimension `N`, stored row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    dim: usize,
    points: Vec<f64>,
    radii: Option<Vec<f64>>,
    seed: Option<u64>,
    method: CodebookMethod,
}

impl Codebook {
    /// Codebook from given points; all must share one dimension.
    pub fn explicit(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(0);
        if dim == 0 {
            return Err(Error::config(
                "codebook needs at least one point of dimension >= 1",
            ));
        }
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::domain("codebook points differ in dimension"));
        }
        Ok(Codebook {
            dim,
            points: points.into_iter().flatten().collect(),
            radii: None,
            seed: None,
            method: CodebookMethod::Explicit,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn flat(&self) -> &[f64] {
        &self.points
    }

    pub fn radii(&self) -> Option<&[f64]> {
        self.radii.as_deref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn method(&self) -> CodebookMethod {
        self.method
    }

    /// Codebook with rows reordered so that row `k` is old row `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.len()];
        if perm.len() != self.len()
            || perm
                .iter()
                .any(|&p| p >= seen.len() || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::domain("not a permutation of the codeword indices"));
        }
        let mut out = self.clone();
        out.points = perm
            .iter()
            .flat_map(|&p| self.point(p).iter().copied())
            .collect();
        Ok(out)
    }

    /// Every point lies in its generating ellipsoid (within 1e-12).
    pub fn within_ellipsoid(&self) -> bool {
        let Some(radii) = &self.radii else {
            return true;
        };
        (0..self.len()).all(|i| {
            let s: f64 = self
                .point(i)
                .iter()
                .zip(radii)
                .map(|(x, r)| (x / r) * (x / r))
                .sum();
            s <= 1.0 + INSIDE_TOL
        })
    }
}

/// `M` independent uniform points in the ellipsoid with semi-axes `radii`.
pub fn generate_codebook(radii: &[f64], m: usize, seed_value: u64) -> Result<Codebook> {
    if m == 0 {
        return Err(Error::config("codebook size M must be >= 1"));
    }
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::domain(
            "codebook radii must be a non-empty list of positive values",
        ));
    }
    let mut rng = seed::rng(seed_value, &[0x636f_6465]);
    let mut points = Vec::with_capacity(m * radii.len());
    for _ in 0..m {
        points.extend(sample_uniform_ellipsoid(radii, &mut rng));
    }
    Ok(Codebook {
        dim: radii.len(),
        points,
        radii: Some(radii.to_vec()),
        seed: Some(seed_value),
        method: CodebookMethod::UniformRandom,
    })
}

/// Whether a minimum-distance decoder can fail to return codeword `i` for
/// `received`; ties count as failures.
pub fn decode_error_indicator(codebook: &Codebook, i: usize, received: &[f64]) -> Result<bool> {
    if i >= codebook.len() {
        return Err(Error::Range(format!(
            "codeword index {i} out of range for {} codewords",
            codebook.len()
        )));
    }
    if received.len() != codebook.dim() {
        return Err(Error::domain(format!(
            "received point has dimension {}, codebook has {}",
            received.len(),
            codebook.dim()
        )));
    }
    let d2 = |p: &[f64]| -> f64 { p.iter().zip(received).map(|(a, b)| (a - b) * (a - b)).sum() };
    let own = d2(codebook.point(i));
    Ok((0..codebook.len()).any(|j| j != i && d2(codebook.point(j)) <= own))
}

/// `(Omega/pi) log2(sqrt(E)/eps) - R`; negative above the rate limit.
pub fn error_exponent(omega: f64, energy: f64, eps: f64, rate: f64) -> Result<f64> {
    if !(rate >= 0.0) {
        return Err(Error::domain(format!("rate must be >= 0, got {rate}")));
    }
    if !(omega > 0.0 && energy > 0.0 && eps > 0.0) {
        return Err(Error::domain("omega, energy and eps must be > 0"));
    }
    Ok(omega / std::f64::consts::PI * (energy.sqrt() / eps).log2() - rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn codebook_generation() {
        let a = generate_codebook(&[1.0, 0.5, 0.1], 500, 11).unwrap();
        let b = generate_codebook(&[1.0, 0.5, 0.1], 500, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 500);
        assert!(a.within_ellipsoid());
        assert_ne!(a, generate_codebook(&[1.0, 0.5, 0.1], 500, 12).unwrap());
        assert_eq!(generate_codebook(&[2.0], 1, 0).unwrap().len(), 1);
        assert!(generate_codebook(&[2.0], 0, 0).is_err());
    }

    #[test]
    fn decode_examples() {
        let single = Codebook::explicit(vec![vec![0.0, 0.0]]).unwrap();
        assert!(!decode_error_indicator(&single, 0, &[0.3, 0.1]).unwrap());
        let two = Codebook::explicit(vec![vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        assert!(decode_error_indicator(&two, 0, &[1.0, 0.5]).unwrap());
        assert!(decode_error_indicator(&two, 1, &[1.0, 0.5]).unwrap());
        assert!(!decode_error_indicator(&two, 0, &[0.0, 0.0]).unwrap());
        assert!(matches!(
            decode_error_indicator(&two, 2, &[0.0, 0.0]),
            Err(Error::Range(_))
        ));
        assert!(decode_error_indicator(&two, 0, &[0.0]).is_err());
    }

    #[test]
    fn exponent_examples() {
        assert!((error_exponent(PI, 16.0, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((error_exponent(PI, 16.0, 1.0, 0.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(error_exponent(PI, 16.0, 1.0, 2.0).unwrap().abs() < 1e-12);
        assert!(error_exponent(PI, 16.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn estimate_edge_cases() {
        let far = Codebook::explicit(vec![vec![0.0], vec![2.0]]).unwrap();
        let r = estimate_delta(&far, 1.0, 1000, 1).unwrap();
        assert_eq!(r.delta_hat, 0.0);
        let same = Codebook::explicit(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let r = estimate_delta(&same, 1.0, 1000, 1).unwrap();
        assert_eq!(r.delta_hat, 1.0);
        assert!(matches!(
            estimate_delta(&far, 1.0, 10, 1),
            Err(Error::Config(_))
        ));
        let one = Codebook::explicit(vec![vec![0.0; 4]]).unwrap();
        assert_eq!(estimate_delta(&one, 1.0, 100, 1).unwrap().delta_hat, 0.0);
    }

    #[test]
    fn permutation_check() {
        let c = Codebook::explicit(vec![vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let p = c.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.point(0), &[2.0]);
        assert!(c.permuted(&[0, 0, 1]).is_err());
        assert!(c.permuted(&[0, 1]).is_err());
    }
}
